//! 50%-crossing delay, average supply power and PDP.

use thiserror::Error;

use super::engine::Waveform;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum MeasureError {
    /// The output never crossed 50% after an input edge: a distorted output.
    #[error("output '{output}' has no 50% crossing after the input edge at {at:e} s")]
    NoTransition { output: String, at: f64 },
    #[error("input '{0}' never crosses 50%")]
    NoInputTransition(String),
    #[error("net '{0}' is not in the waveform")]
    UnknownNet(String),
    #[error("measurement window of {window:e} s is shorter than {required:e} s")]
    WindowTooShort { window: f64, required: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Edge {
    Rising,
    Falling,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Crossing {
    pub time: f64,
    pub edge: Edge,
}

/// All crossings of `level`, linearly interpolated between samples.
pub fn crossings(times: &[f64], series: &[f64], level: f64) -> Vec<Crossing> {
    let mut out = Vec::new();
    for k in 0..times.len().saturating_sub(1) {
        let (a, b) = (series[k] - level, series[k + 1] - level);
        let edge = if a < 0.0 && b >= 0.0 {
            Edge::Rising
        } else if a >= 0.0 && b < 0.0 {
            Edge::Falling
        } else {
            continue;
        };
        let frac = if a == b { 0.0 } else { a / (a - b) };
        let time = times[k] + frac * (times[k + 1] - times[k]);
        out.push(Crossing { time, edge });
    }
    out
}

fn series<'a>(w: &'a Waveform, net: &str) -> Result<&'a [f64], MeasureError> {
    w.voltage(net).ok_or_else(|| MeasureError::UnknownNet(net.to_string()))
}

/// Worst-case 50%-to-50% delay from `input` to `output`.
///
/// Each input crossing is paired with the first output crossing at or
/// after it and before the next input crossing.
pub fn measure_delay(w: &Waveform, input: &str, output: &str, vdd: f64) -> Result<f64, MeasureError> {
    let half = vdd / 2.0;
    let ins = crossings(&w.times, series(w, input)?, half);
    let outs = crossings(&w.times, series(w, output)?, half);
    if ins.is_empty() {
        return Err(MeasureError::NoInputTransition(input.to_string()));
    }
    let mut worst = 0.0f64;
    for (k, edge) in ins.iter().enumerate() {
        let limit = ins.get(k + 1).map_or(f64::INFINITY, |c| c.time);
        let hit = outs
            .iter()
            .find(|c| c.time >= edge.time && c.time < limit)
            .ok_or_else(|| MeasureError::NoTransition {
                output: output.to_string(),
                at: edge.time,
            })?;
        worst = worst.max(hit.time - edge.time);
    }
    Ok(worst)
}

/// Average of `vdd * supply_current` over `[t_start, end]`, trapezoidal in
/// time. `min_window` is the shortest acceptable window.
pub fn measure_power(w: &Waveform, vdd: f64, t_start: f64, min_window: f64) -> Result<f64, MeasureError> {
    let end = w.end_time();
    let window = end - t_start;
    if w.len() < 2 || !(window > 0.0) || window < min_window * (1.0 - 1e-9) {
        return Err(MeasureError::WindowTooShort {
            window: window.max(0.0),
            required: min_window,
        });
    }
    let i = &w.supply_current;
    let t = &w.times;
    let mut charge = 0.0;
    for k in 0..t.len() - 1 {
        let (t0, t1) = (t[k], t[k + 1]);
        if t1 <= t_start {
            continue;
        }
        let (mut a, mut ia) = (t0, i[k]);
        if t0 < t_start {
            let frac = (t_start - t0) / (t1 - t0);
            ia += frac * (i[k + 1] - i[k]);
            a = t_start;
        }
        charge += 0.5 * (ia + i[k + 1]) * (t1 - a);
    }
    Ok(vdd * charge / window)
}

/// Power-delay product, joules.
pub fn pdp(delay: f64, power: f64) -> f64 {
    delay * power
}

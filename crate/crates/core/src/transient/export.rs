//! Waveform writers: CSV samples and VCD.

use std::io::{self, Write};

use vcd::{TimescaleUnit, Value, VarType};

use super::engine::Waveform;

/// Header `time,<net>...,idd`, one row per accepted step, SI units.
pub fn write_csv<W: Write>(w: &Waveform, out: W) -> Result<(), csv::Error> {
    let mut wr = csv::Writer::from_writer(out);
    let mut header = vec!["time".to_string()];
    header.extend(w.nets.iter().cloned());
    header.push("idd".into());
    wr.write_record(&header)?;
    for k in 0..w.len() {
        let mut row = Vec::with_capacity(header.len());
        row.push(format!("{:e}", w.times[k]));
        row.extend(w.node_volts.iter().map(|s| format!("{:e}", s[k])));
        row.push(format!("{:e}", w.supply_current[k]));
        wr.write_record(&row)?;
    }
    wr.flush()?;
    Ok(())
}

/// VCD with a 1-bit wire per net (threshold `vdd / 2`) and a real-valued
/// variable `<net>_v` for each of `analog`. Time unit is femtoseconds.
pub fn write_vcd<W: Write>(w: &Waveform, vdd: f64, analog: &[String], out: W) -> io::Result<()> {
    let mut v = vcd::Writer::new(out);
    v.timescale(1, TimescaleUnit::FS)?;
    v.add_module("cell")?;
    let wires = w
        .nets
        .iter()
        .map(|n| v.add_wire(1, n))
        .collect::<io::Result<Vec<_>>>()?;
    let mut reals = Vec::new();
    for name in analog {
        if let Some(i) = w.nets.iter().position(|n| n == name) {
            reals.push((i, v.add_var(VarType::Real, 64, &format!("{name}_v"), None)?));
        }
    }
    v.upscope()?;
    v.enddefinitions()?;

    let logic = |x: f64| if x >= vdd / 2.0 { Value::V1 } else { Value::V0 };
    let mut last: Vec<Option<Value>> = vec![None; wires.len()];
    let mut last_ts = None;
    for k in 0..w.len() {
        let ts = (w.times[k] * 1e15).round() as u64;
        let mut stamped = last_ts == Some(ts);
        for (i, id) in wires.iter().enumerate() {
            let val = logic(w.node_volts[i][k]);
            if last[i] != Some(val) {
                if !stamped {
                    v.timestamp(ts)?;
                    stamped = true;
                }
                v.change_scalar(*id, val)?;
                last[i] = Some(val);
            }
        }
        for (i, id) in &reals {
            if !stamped {
                v.timestamp(ts)?;
                stamped = true;
            }
            v.change_real(*id, w.node_volts[*i][k])?;
        }
        if stamped {
            last_ts = Some(ts);
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn wave() -> Waveform {
        Waveform {
            times: vec![0.0, 1e-12, 2e-12],
            nets: vec!["a".into(), "y".into()],
            node_volts: vec![vec![0.0, 1.0, 1.8], vec![1.8, 1.2, 0.0]],
            supply_current: vec![0.0, 1e-6, 0.0],
        }
    }

    #[test]
    fn csv_header_and_rows() {
        let mut buf = Vec::new();
        write_csv(&wave(), &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let mut rd = csv::Reader::from_reader(text.as_bytes());
        assert_eq!(rd.headers().unwrap(), vec!["time", "a", "y", "idd"]);
        let rows: Vec<csv::StringRecord> = rd.records().map(Result::unwrap).collect();
        assert_eq!(rows.len(), 3);
        assert_eq!(rows[1][3].parse::<f64>().unwrap(), 1e-6);
    }

    #[test]
    fn vcd_parses_back() {
        let mut buf = Vec::new();
        write_vcd(&wave(), 1.8, &["y".to_string()], &mut buf).unwrap();
        let mut p = vcd::Parser::new(&buf[..]);
        let header = p.parse_header().unwrap();
        assert!(header.find_var(&["cell", "a"]).is_some());
        assert!(header.find_var(&["cell", "y_v"]).is_some());
        let commands: Vec<_> = p.map(Result::unwrap).collect();
        assert!(commands.iter().any(|c| matches!(c, vcd::Command::ChangeReal(_, _))));
    }
}

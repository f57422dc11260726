//! Level-1 (square-law) MOSFET model.

use serde::{Deserialize, Serialize};

use crate::netlist::Polarity;

/// Square-law device parameters. `vt0` is signed: negative for PMOS.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct DeviceModel {
    pub vt0: f64,
    /// Process transconductance `mu * Cox`, A/V².
    pub kprime: f64,
    /// Channel-length modulation, 1/V.
    pub lambda: f64,
    /// Gate capacitance per unit area, F/m².
    pub cox_area: f64,
    /// Lumped junction capacitance per drain/source terminal, F.
    pub cj_term: f64,
}

impl DeviceModel {
    pub fn nmos_default() -> Self {
        DeviceModel {
            vt0: 0.4,
            kprime: 170e-6,
            lambda: 0.05,
            cox_area: 8.5e-3,
            cj_term: 1e-15,
        }
    }

    pub fn pmos_default() -> Self {
        DeviceModel {
            vt0: -0.4,
            kprime: 60e-6,
            ..Self::nmos_default()
        }
    }

    pub fn polarity(&self) -> Polarity {
        if self.vt0 < 0.0 {
            Polarity::Pmos
        } else {
            Polarity::Nmos
        }
    }

    pub fn validate(&self) -> Result<(), String> {
        if !(self.kprime > 0.0) {
            return Err("kprime must be positive".into());
        }
        if !(self.cox_area >= 0.0 && self.lambda >= 0.0 && self.cj_term >= 0.0) {
            return Err("cox_area, lambda and cj_term must be non-negative".into());
        }
        Ok(())
    }

    pub fn gate_capacitance(&self, w: f64, l: f64) -> f64 {
        self.cox_area * w * l
    }
}

impl Default for DeviceModel {
    fn default() -> Self {
        Self::nmos_default()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ModelSet {
    pub nmos: DeviceModel,
    pub pmos: DeviceModel,
}

impl Default for ModelSet {
    fn default() -> Self {
        ModelSet {
            nmos: DeviceModel::nmos_default(),
            pmos: DeviceModel::pmos_default(),
        }
    }
}

impl ModelSet {
    pub fn get(&self, polarity: Polarity) -> &DeviceModel {
        match polarity {
            Polarity::Nmos => &self.nmos,
            Polarity::Pmos => &self.pmos,
        }
    }

    pub fn vtn(&self) -> f64 {
        self.nmos.vt0.abs()
    }

    pub fn vtp_abs(&self) -> f64 {
        self.pmos.vt0.abs()
    }
}

/// Current and partial derivatives for `vds >= 0` of an n-type device
/// with positive threshold `vt` and gain `beta = kprime * W / L`.
/// Returns `(i, di/dvgs, di/dvds)`.
pub fn square_law(beta: f64, vt: f64, lambda: f64, vgs: f64, vds: f64) -> (f64, f64, f64) {
    let vov = vgs - vt;
    if vov <= 0.0 {
        return (0.0, 0.0, 0.0);
    }
    let clm = 1.0 + lambda * vds;
    if vds < vov {
        let core = vov * vds - 0.5 * vds * vds;
        let i = beta * core * clm;
        let gm = beta * vds * clm;
        let gds = beta * (vov - vds) * clm + beta * core * lambda;
        (i, gm, gds)
    } else {
        let core = 0.5 * vov * vov;
        let i = beta * core * clm;
        let gm = beta * vov * clm;
        let gds = beta * core * lambda;
        (i, gm, gds)
    }
}

/// Drain current (into the drain, through the channel to the source) and
/// its sensitivities to the three terminal voltages.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MosEval {
    pub id: f64,
    pub d_vd: f64,
    pub d_vg: f64,
    pub d_vs: f64,
}

fn nmos_eval(beta: f64, vt: f64, lambda: f64, vd: f64, vg: f64, vs: f64) -> MosEval {
    if vd >= vs {
        let (i, gm, gds) = square_law(beta, vt, lambda, vg - vs, vd - vs);
        MosEval {
            id: i,
            d_vd: gds,
            d_vg: gm,
            d_vs: -gm - gds,
        }
    } else {
        // Source and drain trade places.
        let (i, gm, gds) = square_law(beta, vt, lambda, vg - vd, vs - vd);
        MosEval {
            id: -i,
            d_vd: gm + gds,
            d_vg: -gm,
            d_vs: -gds,
        }
    }
}

/// Evaluates a device at terminal voltages `vd`, `vg`, `vs`.
pub fn mos_eval(
    model: &DeviceModel,
    polarity: Polarity,
    w: f64,
    l: f64,
    vd: f64,
    vg: f64,
    vs: f64,
) -> MosEval {
    let beta = model.kprime * w / l;
    let vt = model.vt0.abs();
    match polarity {
        Polarity::Nmos => nmos_eval(beta, vt, model.lambda, vd, vg, vs),
        Polarity::Pmos => {
            let e = nmos_eval(beta, vt, model.lambda, -vd, -vg, -vs);
            MosEval {
                id: -e.id,
                ..e
            }
        }
    }
}

/// Drain current for gate-source and drain-source voltages. The polarity
/// follows the sign of `model.vt0`.
pub fn device_current(model: &DeviceModel, w: f64, l: f64, vgs: f64, vds: f64) -> f64 {
    mos_eval(model, model.polarity(), w, l, vds, vgs, 0.0).id
}

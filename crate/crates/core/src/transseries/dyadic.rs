use crate::error::{Error, Result};
use crate::polymap::{landing_preperiodic, pullback_nearest, ExternalAngle, PreperiodicLanding, QuadParam};
use crate::series::TruncatedSeries;
use crate::C64;

use super::{eval_model, tracer, ModelOptions, TransseriesModel};

/// Local evaluator at a dyadic angle `t = p / (2^m q)`.
///
/// `phi` near `e^{2 pi i t}` is the `m`-fold pull-back of the periodic model at
/// `t' = 2^m t`, evaluated at `s' = 2^m s`; at each step the preimage nearest the
/// landing point of `2^k t` is taken.
#[derive(Clone, Debug)]
pub struct DyadicModel {
    pub angle: ExternalAngle,
    pub m: u32,
    pub landing: PreperiodicLanding,
    pub base: TransseriesModel,
    /// `|eval - phi|` at the validation point `s = validation_s`.
    pub validation_error: f64,
    pub validation_s: f64,
}

/// Tolerance for the construction-time comparison against `phi`.
pub const DYADIC_VALIDATION_TOL: f64 = 1e-5;

impl DyadicModel {
    pub fn landing_point(&self) -> C64 {
        self.landing.landing()
    }

    /// `phi(e^{2 pi i t} e^{-s})`.
    pub fn eval(&self, s: C64) -> Result<C64> {
        let scale = f64::from(self.m).exp2();
        let mut y = eval_model(&self.base, s * scale)?;
        let param = &self.base.param;
        for k in (0..self.m as usize).rev() {
            let (x, ratio) = pullback_nearest(param, y, self.landing.preperiodic[k]);
            if ratio > 0.8 {
                return Err(Error::BranchSelectionFailure(format!(
                    "preimages equidistant from the landing point of 2^{k} t at s = {s}"
                )));
            }
            y = x;
        }
        Ok(y)
    }

    /// `(phi - L_t) P_m'(L_t) / (phi(z^{2^m}) - L_{t'})`, which tends to 1 as `s -> 0`.
    pub fn leading_ratio(&self, s: f64) -> Result<C64> {
        let scale = f64::from(self.m).exp2();
        let outer = eval_model(&self.base, C64::new(s * scale, 0.0))? - self.base.landing();
        let inner = self.eval(C64::new(s, 0.0))? - self.landing_point();
        Ok(inner * self.landing.preperiodic_derivative(&self.base.param) / outer)
    }
}

/// Builds the evaluator for a dyadic angle from the model at `2^m t`.
pub fn dyadic_model(
    param: &QuadParam,
    phi: &TruncatedSeries,
    angle: ExternalAngle,
    base: TransseriesModel,
    opts: &ModelOptions,
) -> Result<DyadicModel> {
    let m = angle.dyadic_exponent();
    if m == 0 {
        return Err(Error::InvalidAngle(format!("{angle} is periodic; use build_model")));
    }
    if angle.doubled_n(m) != base.orbit.angle {
        return Err(Error::InvalidAngle(format!(
            "base model is at {}, but 2^{m} {angle} = {}",
            base.orbit.angle,
            angle.doubled_n(m)
        )));
    }
    let landing = landing_preperiodic(param, phi, angle, &opts.landing)?;
    let mut model = DyadicModel { angle, m, landing, base, validation_error: 0.0, validation_s: 1e-3 };
    let tr = tracer(param, phi, opts.series_depth);
    let s = model.validation_s;
    let reference = tr.phi_at(angle.to_f64(), s).0;
    let got = model.eval(C64::new(s, 0.0))?;
    model.validation_error = (got - reference).norm();
    if !(model.validation_error <= DYADIC_VALIDATION_TOL) {
        return Err(Error::BranchSelectionFailure(format!(
            "dyadic evaluator misses phi by {:e} at s = {s}",
            model.validation_error
        )));
    }
    Ok(model)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::boettcher::phi_series;
    use crate::transseries::build_model;

    #[test]
    fn half_angle_at_lambda_half() {
        let p = QuadParam::real(0.5).unwrap();
        let phi = phi_series(&p, 4096).unwrap();
        let opts = ModelOptions::default();
        let base = build_model(&p, &phi, ExternalAngle::zero(), &opts).unwrap();
        let d = dyadic_model(&p, &phi, "1/2".parse().unwrap(), base, &opts).unwrap();
        // the other preimage of the fixed point L_0 = -1 is 1 - (-1) = 2
        assert!((d.landing_point() - C64::new(2.0, 0.0)).norm() < 1e-10);
        assert!((d.eval(C64::new(1e-14, 0.0)).unwrap() - d.landing_point()).norm() < 1e-6);
        assert!(d.validation_error <= DYADIC_VALIDATION_TOL);
        let r1 = d.leading_ratio(1e-4).unwrap();
        let r2 = d.leading_ratio(1e-8).unwrap();
        assert!((r2 - 1.0).norm() < (r1 - 1.0).norm() && (r2 - 1.0).norm() < 1e-3, "{r1} {r2}");
    }

    #[test]
    fn mismatched_base_is_rejected() {
        let p = QuadParam::real(0.5).unwrap();
        let phi = phi_series(&p, 1024).unwrap();
        let opts = ModelOptions::default();
        let base = build_model(&p, &phi, ExternalAngle::zero(), &opts).unwrap();
        assert!(dyadic_model(&p, &phi, "1/6".parse().unwrap(), base, &opts).is_err());
    }
}

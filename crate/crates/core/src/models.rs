//! Test functions in `H^p` whose norms are known in closed form or can be
//! computed to a declared accuracy. Used as oracles for the recovery bound
//! and the stability experiments.

use std::f64::consts::TAU;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::disc::{blaschke_at, circle_sup, Configuration, DiscPoint};
use crate::error::{Error, Result};
use crate::recovery::PIndex;

/// Trapezoid points per circle in the numerical norm.
pub const QUADRATURE_POINTS: usize = 1 << 14;

/// Radii at which circle means are taken before extrapolating to `r = 1`.
pub const QUADRATURE_RADII: [f64; 3] = [0.99, 0.999, 0.9999];

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum HardyModel {
    /// `rotation * B(Z_n, z)`.
    FiniteBlaschke {
        nodes: Configuration,
        #[serde(default = "unit_rotation")]
        rotation: Complex64,
    },
    /// `z^k`.
    Monomial { k: u32 },
    /// `1 / (1 - conj(a) z)`.
    ReproducingKernelPole { a: DiscPoint },
    /// `sum_j coeffs[j] z^j`.
    Polynomial { coeffs: Vec<Complex64> },
    /// `exp(-mass (boundary + z) / (boundary - z))`.
    SingularInner { mass: f64, boundary: Complex64 },
    Product { factors: Vec<HardyModel> },
}

fn unit_rotation() -> Complex64 {
    Complex64::new(1.0, 0.0)
}

/// An `H^p` norm with its declared absolute uncertainty.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct HpNorm {
    pub value: f64,
    pub uncertainty: f64,
    pub analytic: bool,
}

impl HpNorm {
    fn exact(value: f64) -> Self {
        HpNorm {
            value,
            uncertainty: 0.0,
            analytic: true,
        }
    }

    /// `value + uncertainty`, the conservative figure for a-priori bounds.
    pub fn upper(&self) -> f64 {
        self.value + self.uncertainty
    }
}

impl HardyModel {
    pub fn from_json(text: &str) -> Result<Self> {
        let model: HardyModel = serde_json::from_str(text).map_err(|e| Error::Parse {
            line: e.line() as u64,
            msg: e.to_string(),
        })?;
        model.validate()?;
        Ok(model)
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            HardyModel::FiniteBlaschke { rotation, .. } => check_unimodular("rotation", *rotation),
            HardyModel::Monomial { .. } => Ok(()),
            HardyModel::ReproducingKernelPole { a } => {
                if a.is_interior() {
                    Ok(())
                } else {
                    Err(Error::Domain(format!("kernel pole {} must be interior", a.value())))
                }
            }
            HardyModel::Polynomial { coeffs } => {
                if coeffs.iter().all(|c| c.re.is_finite() && c.im.is_finite()) {
                    Ok(())
                } else {
                    Err(Error::Domain("non-finite polynomial coefficient".to_string()))
                }
            }
            HardyModel::SingularInner { mass, boundary } => {
                if !(mass.is_finite() && *mass > 0.0) {
                    return Err(Error::Domain(format!("singular mass {mass} must be positive")));
                }
                check_unimodular("boundary", *boundary)
            }
            HardyModel::Product { factors } => factors.iter().try_for_each(HardyModel::validate),
        }
    }

    /// Unimodular boundary values almost everywhere, hence norm 1 for every `p`.
    pub fn is_inner(&self) -> bool {
        match self {
            HardyModel::FiniteBlaschke { .. }
            | HardyModel::Monomial { .. }
            | HardyModel::SingularInner { .. } => true,
            HardyModel::Product { factors } => factors.iter().all(HardyModel::is_inner),
            _ => false,
        }
    }

    pub(crate) fn eval_raw(&self, z: Complex64) -> Complex64 {
        match self {
            HardyModel::FiniteBlaschke { nodes, rotation } => rotation * blaschke_at(nodes.nodes(), z),
            HardyModel::Monomial { k } => z.powu(*k),
            HardyModel::ReproducingKernelPole { a } => (1.0 - a.value().conj() * z).inv(),
            HardyModel::Polynomial { coeffs } => coeffs
                .iter()
                .rev()
                .fold(Complex64::new(0.0, 0.0), |acc, &c| acc * z + c),
            HardyModel::SingularInner { mass, boundary } => {
                (-*mass * (boundary + z) / (boundary - z)).exp()
            }
            HardyModel::Product { factors } => factors
                .iter()
                .fold(Complex64::new(1.0, 0.0), |acc, f| acc * f.eval_raw(z)),
        }
    }

    fn singular_points(&self, out: &mut Vec<Complex64>) {
        match self {
            HardyModel::SingularInner { boundary, .. } => out.push(*boundary),
            HardyModel::Product { factors } => factors.iter().for_each(|f| f.singular_points(out)),
            _ => {}
        }
    }
}

fn check_unimodular(name: &str, z: Complex64) -> Result<()> {
    if (z.norm() - 1.0).abs() > 1e-12 {
        return Err(Error::Domain(format!("{name} {z} must be unimodular")));
    }
    Ok(())
}

pub fn model_eval(m: &HardyModel, z: DiscPoint) -> Result<Complex64> {
    if !z.is_interior() {
        let mut singular = Vec::new();
        m.singular_points(&mut singular);
        if singular.iter().any(|&s| (s - z.value()).norm() < 1e-15) {
            return Err(Error::Domain(format!(
                "{} is the singular point of a singular inner factor",
                z.value()
            )));
        }
    }
    Ok(m.eval_raw(z.value()))
}

/// `||m||_p`, analytic where known, otherwise circle means at
/// [`QUADRATURE_RADII`] extrapolated linearly in `1 - r`.
pub fn model_hp_norm(m: &HardyModel, p: PIndex) -> HpNorm {
    if m.is_inner() {
        return HpNorm::exact(1.0);
    }
    match m {
        HardyModel::Polynomial { coeffs } if p.value() == 2.0 => {
            HpNorm::exact(coeffs.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt())
        }
        HardyModel::Polynomial { coeffs } if p.is_infinite() && coeffs.len() <= 1 => {
            HpNorm::exact(coeffs.first().map_or(0.0, |c| c.norm()))
        }
        HardyModel::ReproducingKernelPole { a } if p.value() == 2.0 => {
            HpNorm::exact((1.0 - a.value().norm_sqr()).sqrt().recip())
        }
        HardyModel::ReproducingKernelPole { a } if p.is_infinite() => {
            HpNorm::exact((1.0 - a.modulus()).recip())
        }
        _ => numerical_norm(m, p),
    }
}

/// Circle mean `M_p(r)` (or the circle maximum at `p = ∞`).
pub fn circle_mean(m: &HardyModel, p: PIndex, r: f64) -> f64 {
    let on_circle = |t: f64| m.eval_raw(Complex64::from_polar(r, t)).norm();
    if p.is_infinite() {
        return circle_sup(on_circle, QUADRATURE_POINTS).1;
    }
    let step = TAU / QUADRATURE_POINTS as f64;
    let sum: f64 = (0..QUADRATURE_POINTS)
        .map(|i| on_circle(i as f64 * step).powf(p.value()))
        .sum();
    (sum / QUADRATURE_POINTS as f64).powf(p.reciprocal())
}

fn numerical_norm(m: &HardyModel, p: PIndex) -> HpNorm {
    let [n1, n2, n3] = QUADRATURE_RADII.map(|r| circle_mean(m, p, r));
    // successive radii shrink 1 - r by a factor 10
    let first = n2 + (n2 - n1) / 9.0;
    let last = n3 + (n3 - n2) / 9.0;
    let uncertainty = (last - first).abs().max((last - n3).abs());
    HpNorm {
        value: last,
        uncertainty,
        analytic: false,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn pt(re: f64) -> DiscPoint {
        DiscPoint::real(re).unwrap()
    }

    fn one_node(x: f64) -> Configuration {
        Configuration::new(vec![pt(x)]).unwrap()
    }

    #[test]
    fn eval_examples() {
        let m = HardyModel::Monomial { k: 2 };
        assert_eq!(model_eval(&m, pt(0.5)).unwrap(), c(0.25, 0.0));
        let b = HardyModel::FiniteBlaschke {
            nodes: one_node(0.5),
            rotation: c(1.0, 0.0),
        };
        assert_eq!(model_eval(&b, pt(0.0)).unwrap(), c(-0.5, 0.0));
        let s = HardyModel::SingularInner {
            mass: 1.0,
            boundary: c(1.0, 0.0),
        };
        assert!((model_eval(&s, pt(0.0)).unwrap() - c((-1.0f64).exp(), 0.0)).norm() < 1e-15);
        assert!(matches!(model_eval(&s, pt(1.0)), Err(Error::Domain(_))));
        let k = HardyModel::ReproducingKernelPole { a: pt(0.5) };
        assert_eq!(model_eval(&k, pt(0.5)).unwrap(), c(1.0 / 0.75, 0.0));
    }

    #[test]
    fn norm_examples() {
        let poly = HardyModel::Polynomial {
            coeffs: vec![c(3.0, 0.0), c(4.0, 0.0)],
        };
        let n = model_hp_norm(&poly, PIndex::TWO);
        assert_eq!(n.value, 5.0);
        assert!(n.analytic);

        let b = HardyModel::FiniteBlaschke {
            nodes: one_node(0.3),
            rotation: c(0.0, 1.0),
        };
        assert_eq!(model_hp_norm(&b, PIndex::INFINITY).value, 1.0);
        for p in [1.0, 2.0, 3.5, f64::INFINITY] {
            let m = HardyModel::Monomial { k: 4 };
            assert_eq!(model_hp_norm(&m, PIndex::new(p).unwrap()).value, 1.0);
        }
    }

    #[test]
    fn quadrature_agrees_with_parseval() {
        let poly = HardyModel::Polynomial {
            coeffs: vec![c(1.0, -0.5), c(0.25, 0.75), c(-0.3, 0.0), c(0.0, 0.2)],
        };
        let analytic = model_hp_norm(&poly, PIndex::TWO);
        let numeric = numerical_norm(&poly, PIndex::TWO);
        assert!(!numeric.analytic);
        let gap = (analytic.value - numeric.value).abs();
        assert!(gap <= numeric.uncertainty + 1e-12, "gap {gap} vs {}", numeric.uncertainty);
    }

    #[test]
    fn kernel_pole_closed_forms_match_quadrature() {
        let k = HardyModel::ReproducingKernelPole {
            a: DiscPoint::new(c(0.3, 0.4)).unwrap(),
        };
        for p in [PIndex::TWO, PIndex::INFINITY] {
            let exact = model_hp_norm(&k, p).value;
            let numeric = numerical_norm(&k, p);
            assert!((exact - numeric.value).abs() <= numeric.uncertainty + 1e-9);
        }
    }

    #[test]
    fn maximum_modulus_for_inner_models() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let models = [
            HardyModel::FiniteBlaschke {
                nodes: Configuration::from_complex(&[c(0.2, 0.3), c(-0.5, 0.1)]).unwrap(),
                rotation: Complex64::from_polar(1.0, 0.7),
            },
            HardyModel::Monomial { k: 3 },
            HardyModel::SingularInner {
                mass: 2.0,
                boundary: Complex64::from_polar(1.0, 1.0),
            },
            HardyModel::Product {
                factors: vec![
                    HardyModel::Monomial { k: 1 },
                    HardyModel::SingularInner {
                        mass: 0.5,
                        boundary: c(-1.0, 0.0),
                    },
                ],
            },
        ];
        for m in &models {
            assert_eq!(model_hp_norm(m, PIndex::INFINITY).value, 1.0);
            for _ in 0..10_000 {
                let z = Complex64::from_polar(rng.gen::<f64>().sqrt() * 0.999_999, rng.gen::<f64>() * TAU);
                assert!(m.eval_raw(z).norm() <= 1.0 + 1e-12);
            }
        }
    }

    #[test]
    fn product_norm_submultiplicative() {
        let f = HardyModel::Polynomial {
            coeffs: vec![c(0.5, 0.0), c(0.0, 0.5)],
        };
        let g = HardyModel::ReproducingKernelPole { a: pt(-0.4) };
        let fg = HardyModel::Product {
            factors: vec![f.clone(), g.clone()],
        };
        let p = PIndex::INFINITY;
        let lhs = model_hp_norm(&fg, p);
        let rhs = model_hp_norm(&f, p).upper() * model_hp_norm(&g, p).upper();
        assert!(lhs.value <= rhs + lhs.uncertainty + 1e-12);
    }

    #[test]
    fn json_round_trip_and_validation() {
        let text = r#"{"type":"product","factors":[
            {"type":"monomial","k":2},
            {"type":"finite_blaschke","nodes":[[0.5,0.0],[0.0,-0.2]]},
            {"type":"singular_inner","mass":1.5,"boundary":[0.0,1.0]}]}"#;
        let m = HardyModel::from_json(text).unwrap();
        let again = HardyModel::from_json(&serde_json::to_string(&m).unwrap()).unwrap();
        assert_eq!(m, again);
        assert!(HardyModel::from_json(r#"{"type":"singular_inner","mass":-1,"boundary":[1,0]}"#).is_err());
        assert!(HardyModel::from_json(r#"{"type":"reproducing_kernel_pole","a":[1.0,0.0]}"#).is_err());
        assert!(HardyModel::from_json(r#"{"type":"finite_blaschke","nodes":[[0.5,0],[0.5,0]]}"#).is_err());
        assert!(HardyModel::from_json(r#"{"type":"nope"}"#).is_err());
    }
}

//! Exact-model local maps of the saddle and saddle-node and their
//! compositions into the loop, biangle and modified Bowen return maps.
//!
//! Every asymptotic `(1 + o(1))` factor is dropped, so all identities below
//! hold to machine precision.

use serde::{Deserialize, Serialize};

use crate::error::{LabError, Result};
use crate::numeric::TowerValue;

/// Hyperbolic saddle with eigenvalues `-mu`, `lambda` and monodromy coefficient `c`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SaddleParams {
    pub mu: f64,
    pub lambda: f64,
    #[serde(default = "one")]
    pub c: f64,
}

fn one() -> f64 {
    1.0
}

impl SaddleParams {
    pub fn new(mu: f64, lambda: f64, c: f64) -> Result<Self> {
        let p = SaddleParams { mu, lambda, c };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        for (name, v) in [("mu", self.mu), ("lambda", self.lambda), ("c", self.c)] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(LabError::Invariant(format!("saddle {name} must be positive, got {v}")));
            }
        }
        Ok(())
    }

    /// Characteristic number `mu / lambda`.
    pub fn nu(&self) -> f64 {
        self.mu / self.lambda
    }
}

/// Saddle-node `x^{-a} e^{-1/x}` with negative eigenvalue `-b`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SaddleNodeParams {
    pub a: f64,
    pub b: f64,
}

impl SaddleNodeParams {
    pub fn new(a: f64, b: f64) -> Result<Self> {
        let p = SaddleNodeParams { a, b };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.b > 0.0 && self.b.is_finite()) || !self.a.is_finite() {
            return Err(LabError::Invariant(format!(
                "saddle-node needs finite a and b > 0, got a={}, b={}",
                self.a, self.b
            )));
        }
        Ok(())
    }
}

/// One of the three return systems.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum PolycycleModel {
    /// Separatrix loop; `k_transit` is the constant time of the U_B leg.
    Loop {
        saddle: SaddleParams,
        k_transit: f64,
    },
    Biangle {
        a: SaddleParams,
        b: SaddleParams,
    },
    ModifiedBowen {
        node: SaddleNodeParams,
        saddle: SaddleParams,
    },
}

/// Constants derived from a model; fields not meaningful for a kind are `None`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DerivedConstants {
    pub nu: Option<f64>,
    pub big_lambda: Option<f64>,
    pub lambda0: Option<f64>,
    pub c_time: Option<f64>,
    pub recurrence_c: Option<f64>,
}

impl PolycycleModel {
    pub fn loop_model(saddle: SaddleParams, k_transit: f64) -> Result<Self> {
        let m = PolycycleModel::Loop { saddle, k_transit };
        derived_constants(&m)?;
        Ok(m)
    }

    pub fn biangle(a: SaddleParams, b: SaddleParams) -> Result<Self> {
        let m = PolycycleModel::Biangle { a, b };
        derived_constants(&m)?;
        Ok(m)
    }

    pub fn modified_bowen(node: SaddleNodeParams, saddle: SaddleParams) -> Result<Self> {
        let m = PolycycleModel::ModifiedBowen { node, saddle };
        derived_constants(&m)?;
        Ok(m)
    }

    pub fn kind_name(&self) -> &'static str {
        match self {
            PolycycleModel::Loop { .. } => "loop",
            PolycycleModel::Biangle { .. } => "biangle",
            PolycycleModel::ModifiedBowen { .. } => "modified-bowen",
        }
    }

    /// The derived constants; panics only if the model was built unchecked.
    pub fn constants(&self) -> DerivedConstants {
        derived_constants(self).expect("model invariants checked at construction")
    }
}

/// Image coordinate and transit time of one local passage.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Transit {
    pub image: f64,
    pub time: f64,
}

/// Saddle-node passage; `in_chart` is false when the image left (0, 1).
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct NodeTransit {
    pub image: f64,
    pub time: f64,
    pub in_chart: bool,
}

/// One full turn of a return map.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Step {
    pub next: f64,
    pub turn_time: f64,
    pub time_in_b: f64,
}

fn check_chart(x: f64) -> Result<()> {
    if x > 0.0 && x < 1.0 {
        Ok(())
    } else {
        Err(LabError::Domain(format!("coordinate {x} outside (0, 1)")))
    }
}

/// `x ↦ c·x^ν` with transit time `(1/λ) ln(1/x)`.
pub fn saddle_local(x: f64, p: &SaddleParams) -> Result<Transit> {
    check_chart(x)?;
    Ok(Transit { image: p.c * x.powf(p.nu()), time: -x.ln() / p.lambda })
}

/// `x ↦ x^{-a} e^{-1/x}` with transit time `1/(b x)`.
pub fn saddle_node_local(x: f64, p: &SaddleNodeParams) -> Result<NodeTransit> {
    check_chart(x)?;
    let image = (-p.a * x.ln() - 1.0 / x).exp();
    Ok(NodeTransit { image, time: 1.0 / (p.b * x), in_chart: image < 1.0 })
}

fn chart_exit(y: f64) -> Result<()> {
    if y < 1.0 {
        Ok(())
    } else {
        Err(LabError::ChartExit { coordinate: y })
    }
}

/// One turn of the return map from the transversal Σ_A back to itself.
pub fn poincare_step(x: f64, m: &PolycycleModel) -> Result<Step> {
    check_chart(x)?;
    let step = match m {
        PolycycleModel::Loop { saddle, k_transit } => {
            let s = saddle_local(x, saddle)?;
            chart_exit(s.image)?;
            Step { next: s.image, turn_time: s.time + k_transit, time_in_b: *k_transit }
        }
        PolycycleModel::Biangle { a, b } => {
            let first = saddle_local(x, a)?;
            chart_exit(first.image)?;
            let second = saddle_local(first.image, b)?;
            chart_exit(second.image)?;
            Step { next: second.image, turn_time: first.time + second.time, time_in_b: second.time }
        }
        PolycycleModel::ModifiedBowen { node, saddle } => {
            let first = saddle_node_local(x, node)?;
            chart_exit(first.image)?;
            let second = saddle_local(first.image, saddle)?;
            chart_exit(second.image)?;
            Step { next: second.image, turn_time: first.time + second.time, time_in_b: second.time }
        }
    };
    if step.next >= x {
        return Err(LabError::Contraction { current: x, next: step.next });
    }
    Ok(step)
}

/// Loop map in the log coordinate `ζ = -ln x`: `Δ(ζ) = νζ − ln c`.
pub fn loop_zeta_step(zeta: f64, p: &SaddleParams) -> Result<f64> {
    let next = p.nu() * zeta - p.c.ln();
    if !(next > zeta) {
        return Err(LabError::Domain(format!(
            "zeta {zeta} below the expanding range (fixed point {})",
            loop_fixed_point(p)
        )));
    }
    Ok(next)
}

/// The repelling fixed point `ln c / (ν − 1)` of the affine loop map.
pub fn loop_fixed_point(p: &SaddleParams) -> f64 {
    p.c.ln() / (p.nu() - 1.0)
}

/// Closed-form limit of `Δⁿ(ζ)/Δⁿ(ζ̂)`: `(ζ − ζ*)/(ζ̂ − ζ*)`.
pub fn loop_ratio_limit(zeta: f64, zeta_hat: f64, p: &SaddleParams) -> f64 {
    let z = loop_fixed_point(p);
    (zeta - z) / (zeta_hat - z)
}

/// Asymptotic MBE recurrence `τ ↦ e^τ + C` on towers.
pub fn mbe_tau_step(tau: &TowerValue, m: &PolycycleModel) -> Result<TowerValue> {
    let c = match m {
        PolycycleModel::ModifiedBowen { .. } => derived_constants(m)?.recurrence_c.unwrap(),
        _ => return Err(LabError::WrongModel { expected: "modified-bowen" }),
    };
    Ok(tau.exp().add_const(c))
}

pub fn derived_constants(m: &PolycycleModel) -> Result<DerivedConstants> {
    let none = DerivedConstants { nu: None, big_lambda: None, lambda0: None, c_time: None, recurrence_c: None };
    match m {
        PolycycleModel::Loop { saddle, k_transit } => {
            saddle.validate()?;
            if !(saddle.nu() > 1.0) {
                return Err(LabError::Invariant(format!("loop needs nu > 1, got {}", saddle.nu())));
            }
            if !(*k_transit >= 0.0 && k_transit.is_finite()) {
                return Err(LabError::Invariant(format!("loop transit K must be >= 0, got {k_transit}")));
            }
            Ok(DerivedConstants { nu: Some(saddle.nu()), ..none })
        }
        PolycycleModel::Biangle { a, b } => {
            a.validate()?;
            b.validate()?;
            let big = (a.mu * b.mu) / (a.lambda * b.lambda);
            if !(big > 1.0) {
                return Err(LabError::Invariant(format!("biangle needs Lambda > 1, got {big}")));
            }
            let q = a.mu / b.lambda;
            let lambda0 = (big + q) / (1.0 + q);
            Ok(DerivedConstants { big_lambda: Some(big), lambda0: Some(lambda0), ..none })
        }
        PolycycleModel::ModifiedBowen { node, saddle } => {
            node.validate()?;
            saddle.validate()?;
            let (b, l) = (node.b, saddle.lambda);
            Ok(DerivedConstants {
                nu: Some(saddle.nu()),
                c_time: Some(1.0 / b + 1.0 / l),
                recurrence_c: Some((b * saddle.mu / (b + l)).ln()),
                ..none
            })
        }
    }
}

/// Fixed-step RK4 through the linear saddle `ẋ = λx, ẏ = −μy` from `(x0, 1)`
/// to the exit section `x = 1`; the last partial step is sized by Newton on
/// the RK4 increment polynomial. Returns `(c·y_exit, transit time)`.
pub fn saddle_oracle(x0: f64, p: &SaddleParams, step: f64) -> Result<Transit> {
    check_chart(x0)?;
    if !(step > 0.0 && step <= 1e-4) {
        return Err(LabError::StepTooLarge(format!("step {step} exceeds 1e-4")));
    }
    // RK4 on a linear scalar ODE multiplies by the degree-4 Taylor polynomial.
    let amp = |k: f64, s: f64| {
        let z = k * s;
        1.0 + z + z * z / 2.0 + z * z * z / 6.0 + z * z * z * z / 24.0
    };
    let (gx, gy) = (amp(p.lambda, step), amp(-p.mu, step));
    let (mut x, mut y, mut t) = (x0, 1.0, 0.0);
    while x * gx < 1.0 {
        x *= gx;
        y *= gy;
        t += step;
    }
    // partial step: solve x·amp(λ, s) = 1 for s in (0, step]
    let mut s = step * 0.5;
    for _ in 0..60 {
        let z = p.lambda * s;
        let f = x * amp(p.lambda, s) - 1.0;
        let df = x * p.lambda * (1.0 + z + z * z / 2.0 + z * z * z / 6.0);
        let next = (s - f / df).clamp(0.0, step);
        if (next - s).abs() < 1e-18 {
            s = next;
            break;
        }
        s = next;
    }
    y *= amp(-p.mu, s);
    t += s;
    let exit = p.c * y;
    let exact = saddle_local(x0, p)?;
    let rel = ((exit - exact.image) / exact.image).abs();
    let dt = (t - exact.time).abs();
    if rel > 1e-6 || dt > 1e-6 {
        return Err(LabError::StepTooLarge(format!("relative exit error {rel:.3e}, time error {dt:.3e}")));
    }
    Ok(Transit { image: exit, time: t })
}

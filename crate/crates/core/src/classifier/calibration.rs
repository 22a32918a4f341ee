//! Platt scaling: `p = 1 / (1 + exp(A*s + B))` fit by Newton's method with
//! backtracking on the smoothed-target log likelihood.

use serde::{Deserialize, Serialize};

use super::{ClassifierError, Label, LinearModel, SparseVector};

const MAX_ITER: usize = 100;
const MIN_STEP: f64 = 1e-10;
const HESSIAN_RIDGE: f64 = 1e-12;
const GRAD_EPS: f64 = 1e-5;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Calibration {
    pub a: f64,
    pub b: f64,
}

impl Calibration {
    /// Probability of the positive class for raw margin `s`.
    pub fn probability(&self, margin: f64) -> f64 {
        let z = self.a * margin + self.b;
        if z >= 0.0 {
            let e = (-z).exp();
            e / (1.0 + e)
        } else {
            1.0 / (1.0 + z.exp())
        }
    }
}

/// Fits the sigmoid on the model's margins over a held-out labeled set.
pub fn calibrate(model: &LinearModel, held_out: &[(SparseVector, Label)]) -> Result<Calibration, ClassifierError> {
    let mut margins = Vec::with_capacity(held_out.len());
    let mut labels = Vec::with_capacity(held_out.len());
    for (x, y) in held_out {
        margins.push(model.margin(x)?);
        labels.push(*y);
    }
    calibrate_margins(&margins, &labels)
}

fn objective(margins: &[f64], targets: &[f64], a: f64, b: f64) -> f64 {
    margins
        .iter()
        .zip(targets)
        .map(|(&s, &t)| {
            let f = s * a + b;
            if f >= 0.0 {
                t * f + (-f).exp().ln_1p()
            } else {
                (t - 1.0) * f + f.exp().ln_1p()
            }
        })
        .sum()
}

pub fn calibrate_margins(margins: &[f64], labels: &[Label]) -> Result<Calibration, ClassifierError> {
    if margins.len() != labels.len() {
        return Err(ClassifierError::LengthMismatch(margins.len(), labels.len()));
    }
    let n_pos = labels.iter().filter(|l| l.is_positive()).count() as f64;
    let n_neg = labels.len() as f64 - n_pos;
    if n_pos == 0.0 || n_neg == 0.0 {
        return Err(ClassifierError::SingleClass);
    }
    let lo = margins.iter().cloned().fold(f64::INFINITY, f64::min);
    let hi = margins.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    if !(hi > lo) {
        return Err(ClassifierError::Calibration("all margins are equal".into()));
    }

    let hi_target = (n_pos + 1.0) / (n_pos + 2.0);
    let lo_target = 1.0 / (n_neg + 2.0);
    let targets: Vec<f64> = labels.iter().map(|l| if l.is_positive() { hi_target } else { lo_target }).collect();

    let mut a = 0.0;
    let mut b = ((n_neg + 1.0) / (n_pos + 1.0)).ln();
    let mut fval = objective(margins, &targets, a, b);

    for _ in 0..MAX_ITER {
        let (mut h11, mut h22, mut h21) = (HESSIAN_RIDGE, HESSIAN_RIDGE, 0.0);
        let (mut g1, mut g2) = (0.0, 0.0);
        for (&s, &t) in margins.iter().zip(&targets) {
            let f = s * a + b;
            let (p, q) = if f >= 0.0 {
                let e = (-f).exp();
                (e / (1.0 + e), 1.0 / (1.0 + e))
            } else {
                let e = f.exp();
                (1.0 / (1.0 + e), e / (1.0 + e))
            };
            let d2 = p * q;
            h11 += s * s * d2;
            h22 += d2;
            h21 += s * d2;
            let d1 = t - p;
            g1 += s * d1;
            g2 += d1;
        }
        if g1.abs() < GRAD_EPS && g2.abs() < GRAD_EPS {
            break;
        }
        let det = h11 * h22 - h21 * h21;
        let da = -(h22 * g1 - h21 * g2) / det;
        let db = -(-h21 * g1 + h11 * g2) / det;
        let gd = g1 * da + g2 * db;
        let mut step = 1.0;
        while step >= MIN_STEP {
            let (na, nb) = (a + step * da, b + step * db);
            let nf = objective(margins, &targets, na, nb);
            if nf < fval + 1e-4 * step * gd {
                a = na;
                b = nb;
                fval = nf;
                break;
            }
            step /= 2.0;
        }
        if step < MIN_STEP {
            break;
        }
    }

    if !(a < 0.0) || !a.is_finite() || !b.is_finite() {
        return Err(ClassifierError::Calibration(format!("fitted slope {a} is not negative")));
    }
    Ok(Calibration { a, b })
}

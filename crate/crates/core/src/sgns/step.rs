//! The skipgram negative-sampling update.
//!
//! For a center (hidden) vector `v`, a positive context vector `u` and
//! negatives `n_1..n_k` the loss is
//!
//! ```text
//! L = -ln σ(u·v) - Σ ln σ(-n_i·v)
//! ```
//!
//! with gradients `∂L/∂v = (σ(u·v) - 1) u + Σ σ(n_i·v) n_i`,
//! `∂L/∂u = (σ(u·v) - 1) v` and `∂L/∂n_i = σ(n_i·v) v`. All gradients are
//! taken at the incoming parameter values.

use num_traits::Float;

/// Smallest probability fed to `ln` when reporting the loss.
const LOSS_FLOOR: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum SigmoidMode {
    /// 512-entry lookup table over [-8, 8], clamped outside.
    #[default]
    Table,
    /// `1 / (1 + e^-x)` evaluated directly.
    Exact,
}

#[derive(Debug, Clone)]
pub struct Sigmoid {
    mode: SigmoidMode,
    table: Vec<f32>,
}

impl Sigmoid {
    pub const TABLE_SIZE: usize = 512;
    pub const MAX_X: f32 = 8.0;

    pub fn new(mode: SigmoidMode) -> Self {
        let table = match mode {
            SigmoidMode::Table => {
                let last = (Self::TABLE_SIZE - 1) as f64;
                (0..Self::TABLE_SIZE)
                    .map(|i| {
                        let x = -f64::from(Self::MAX_X) + 2.0 * f64::from(Self::MAX_X) * i as f64 / last;
                        sigmoid(x) as f32
                    })
                    .collect()
            }
            SigmoidMode::Exact => Vec::new(),
        };
        Sigmoid { mode, table }
    }

    pub fn mode(&self) -> SigmoidMode {
        self.mode
    }

    pub fn eval(&self, x: f32) -> f32 {
        match self.mode {
            SigmoidMode::Exact => sigmoid(f64::from(x)) as f32,
            SigmoidMode::Table => {
                if x <= -Self::MAX_X {
                    self.table[0]
                } else if x >= Self::MAX_X {
                    self.table[Self::TABLE_SIZE - 1]
                } else {
                    let scale = (Self::TABLE_SIZE - 1) as f32 / (2.0 * Self::MAX_X);
                    let idx = ((x + Self::MAX_X) * scale).round() as usize;
                    self.table[idx.min(Self::TABLE_SIZE - 1)]
                }
            }
        }
    }
}

/// Logistic function, exact.
pub fn sigmoid<F: Float>(x: F) -> F {
    if x >= F::zero() {
        F::one() / (F::one() + (-x).exp())
    } else {
        let e = x.exp();
        e / (F::one() + e)
    }
}

fn dot<F: Float>(a: &[F], b: &[F]) -> F {
    a.iter().zip(b).fold(F::zero(), |acc, (&x, &y)| acc + x * y)
}

/// Score one (hidden, target) pair. Adds `-lr · ∂L/∂hidden` into `grad`,
/// moves `target` by `-lr · ∂L/∂target`, and returns this pair's loss term.
pub fn update_target<F, S>(hidden: &[F], target: &mut [F], grad: &mut [F], positive: bool, lr: F, sigmoid: S) -> F
where
    F: Float,
    S: Fn(F) -> F,
{
    let score = sigmoid(dot(hidden, target));
    let label = if positive { F::one() } else { F::zero() };
    let g = lr * (label - score);
    for ((gk, tk), &hk) in grad.iter_mut().zip(target.iter_mut()).zip(hidden) {
        *gk = *gk + g * *tk;
        *tk = *tk + g * hk;
    }
    let p = if positive { score } else { F::one() - score };
    -p.max(F::from(LOSS_FLOOR).unwrap()).ln()
}

/// One SGNS update of `center`, `context` and every negative with learning
/// rate `lr`. Returns the loss before the update.
pub fn train_step<F, S>(center: &mut [F], context: &mut [F], negatives: &mut [&mut [F]], lr: F, sigmoid: S) -> F
where
    F: Float,
    S: Fn(F) -> F + Copy,
{
    let hidden = center.to_vec();
    let mut grad = vec![F::zero(); center.len()];
    let mut loss = update_target(&hidden, context, &mut grad, true, lr, sigmoid);
    for negative in negatives.iter_mut() {
        loss = loss + update_target(&hidden, negative, &mut grad, false, lr, sigmoid);
    }
    for (c, g) in center.iter_mut().zip(grad) {
        *c = *c + g;
    }
    loss
}

use std::fmt;
use std::fmt::Write as _;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::network::{Batch, Network};
use super::NnError;
use crate::linalg::SquareMatrix;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Algorithm {
    /// Full-batch gradient descent.
    Gd,
    /// Gradient descent with momentum.
    GdMomentum,
    /// Resilient backpropagation.
    Rprop,
    /// Levenberg-Marquardt.
    Lm,
    /// Levenberg-Marquardt on an L2-penalized objective.
    LmL2,
}

impl Algorithm {
    pub const ALL: [Algorithm; 5] = [
        Algorithm::Gd,
        Algorithm::GdMomentum,
        Algorithm::Rprop,
        Algorithm::Lm,
        Algorithm::LmL2,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Algorithm::Gd => "gd",
            Algorithm::GdMomentum => "gd_momentum",
            Algorithm::Rprop => "rprop",
            Algorithm::Lm => "lm",
            Algorithm::LmL2 => "lm_l2",
        }
    }
}

impl fmt::Display for Algorithm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Algorithm {
    type Err = NnError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Algorithm::ALL
            .into_iter()
            .find(|a| a.name() == s)
            .ok_or_else(|| NnError::UnknownAlgorithm(s.to_string()))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RpropParams {
    pub eta_plus: f64,
    pub eta_minus: f64,
    pub delta_init: f64,
    pub delta_max: f64,
    pub delta_min: f64,
}

impl Default for RpropParams {
    fn default() -> Self {
        Self {
            eta_plus: 1.2,
            eta_minus: 0.5,
            delta_init: 0.1,
            delta_max: 50.0,
            delta_min: 1e-6,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct TrainerSpec {
    pub algorithm: Algorithm,
    pub learning_rate: f64,
    pub momentum: f64,
    pub rprop: RpropParams,
    /// Initial LM damping.
    pub mu_init: f64,
    /// Training stops once the damping would exceed this.
    pub mu_max: f64,
    /// Fixed weight penalty of `lm_l2`.
    pub l2_lambda: f64,
    pub max_epochs: usize,
    /// Consecutive epochs without validation improvement before stopping.
    pub patience: usize,
    /// Training stops once train MSE reaches this value.
    pub goal: f64,
}

impl Default for TrainerSpec {
    fn default() -> Self {
        Self {
            algorithm: Algorithm::Lm,
            learning_rate: 0.01,
            momentum: 0.9,
            rprop: RpropParams::default(),
            mu_init: 1e-3,
            mu_max: 1e10,
            l2_lambda: 0.01,
            max_epochs: 1000,
            patience: 6,
            goal: 0.0,
        }
    }
}

impl TrainerSpec {
    pub fn new(algorithm: Algorithm) -> Self {
        Self {
            algorithm,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<(), NnError> {
        let positive = |name: &'static str, v: f64| {
            if v.is_finite() && v > 0.0 {
                Ok(())
            } else {
                Err(NnError::InvalidHyperparameter { name, value: v })
            }
        };
        match self.algorithm {
            Algorithm::Gd => positive("learning_rate", self.learning_rate)?,
            Algorithm::GdMomentum => {
                positive("learning_rate", self.learning_rate)?;
                if !(0.0..1.0).contains(&self.momentum) {
                    return Err(NnError::InvalidHyperparameter {
                        name: "momentum",
                        value: self.momentum,
                    });
                }
            }
            Algorithm::Rprop => {
                let r = &self.rprop;
                positive("eta_plus", r.eta_plus)?;
                positive("eta_minus", r.eta_minus)?;
                positive("delta_init", r.delta_init)?;
                positive("delta_max", r.delta_max)?;
                positive("delta_min", r.delta_min)?;
            }
            Algorithm::Lm | Algorithm::LmL2 => {
                positive("mu_init", self.mu_init)?;
                positive("mu_max", self.mu_max)?;
                if self.algorithm == Algorithm::LmL2 {
                    positive("l2_lambda", self.l2_lambda)?;
                }
            }
        }
        if self.max_epochs == 0 {
            return Err(NnError::InvalidHyperparameter {
                name: "max_epochs",
                value: 0.0,
            });
        }
        if self.patience == 0 {
            return Err(NnError::InvalidHyperparameter {
                name: "patience",
                value: 0.0,
            });
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EpochRecord {
    pub epoch: usize,
    pub train_mse: f64,
    pub val_mse: f64,
    pub step_accepted: bool,
    /// Value of the objective the trainer minimizes (sum of squared
    /// residuals, plus the weight penalty for `lm_l2`).
    pub objective: f64,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct History {
    /// Epoch 0 is the initial network.
    pub epochs: Vec<EpochRecord>,
    /// Smallest and largest RProp step size after each update (RProp only).
    pub rprop_step_bounds: Vec<(f64, f64)>,
}

impl History {
    pub fn to_csv(&self) -> String {
        let mut out = String::from("epoch,train_mse,val_mse,step_accepted\n");
        for e in &self.epochs {
            let _ = writeln!(out, "{},{},{},{}", e.epoch, e.train_mse, e.val_mse, e.step_accepted);
        }
        out
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StopReason {
    MaxEpochs,
    ValidationPatience,
    GoalReached,
    DampingLimit,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainedNetwork {
    /// Parameters at the epoch with the lowest validation MSE.
    pub network: Network,
    pub best_epoch: usize,
    pub best_val_mse: f64,
    pub stop_reason: StopReason,
    pub history: History,
}

fn sq_norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum()
}

struct Tracker {
    history: History,
    best: Network,
    best_epoch: usize,
    best_val: f64,
    fails: usize,
}

impl Tracker {
    /// Records an epoch; returns `true` when patience is exhausted.
    fn record(&mut self, net: &Network, rec: EpochRecord, patience: usize) -> Result<bool, NnError> {
        self.history.epochs.push(rec);
        if !(rec.train_mse.is_finite() && rec.val_mse.is_finite() && net.is_finite()) {
            return Err(NnError::Diverged {
                epoch: rec.epoch,
                history: Box::new(std::mem::take(&mut self.history)),
            });
        }
        if rec.val_mse < self.best_val {
            self.best_val = rec.val_mse;
            self.best = net.clone();
            self.best_epoch = rec.epoch;
            self.fails = 0;
        } else {
            self.fails += 1;
        }
        Ok(self.fails >= patience)
    }
}

/// Trains `net` on scaled data with early stopping on `val`.
pub fn train(
    net: Network,
    train: Batch<'_>,
    val: Batch<'_>,
    trainer: &TrainerSpec,
) -> Result<TrainedNetwork, NnError> {
    trainer.validate()?;
    let mut net = net;
    let n = train.len() as f64;
    let l2 = if trainer.algorithm == Algorithm::LmL2 {
        trainer.l2_lambda
    } else {
        0.0
    };
    let objective = |net: &Network, sse: f64| sse + l2 * sq_norm(&net.params());

    let train_mse = net.mse(train)?;
    let val_mse = net.mse(val)?;
    let mut tracker = Tracker {
        history: History::default(),
        best: net.clone(),
        best_epoch: 0,
        best_val: f64::INFINITY,
        fails: 0,
    };
    tracker.record(
        &net,
        EpochRecord {
            epoch: 0,
            train_mse,
            val_mse,
            step_accepted: true,
            objective: objective(&net, train_mse * n),
        },
        trainer.patience,
    )?;
    tracker.fails = 0;

    let p = net.n_params();
    let mut velocity = vec![0.0; p];
    let mut rprop_delta = vec![trainer.rprop.delta_init; p];
    let mut prev_grad = vec![0.0; p];
    let mut mu = trainer.mu_init;
    let mut current_mse = train_mse;
    let mut stop_reason = StopReason::MaxEpochs;

    for epoch in 1..=trainer.max_epochs {
        if current_mse <= trainer.goal {
            stop_reason = StopReason::GoalReached;
            break;
        }
        let mut accepted = true;
        match trainer.algorithm {
            Algorithm::Gd | Algorithm::GdMomentum | Algorithm::Rprop => {
                // gradient of the MSE
                let grad: Vec<f64> = net.gradient(train)?.iter().map(|g| 2.0 * g / n).collect();
                let mut params = net.params();
                match trainer.algorithm {
                    Algorithm::Gd => {
                        for (w, g) in params.iter_mut().zip(&grad) {
                            *w -= trainer.learning_rate * g;
                        }
                    }
                    Algorithm::GdMomentum => {
                        for ((w, v), g) in params.iter_mut().zip(&mut velocity).zip(&grad) {
                            *v = trainer.momentum * *v - trainer.learning_rate * g;
                            *w += *v;
                        }
                    }
                    _ => {
                        let rp = &trainer.rprop;
                        for i in 0..p {
                            let s = prev_grad[i] * grad[i];
                            let mut g = grad[i];
                            if s > 0.0 {
                                rprop_delta[i] = (rprop_delta[i] * rp.eta_plus).min(rp.delta_max);
                            } else if s < 0.0 {
                                rprop_delta[i] = (rprop_delta[i] * rp.eta_minus).max(rp.delta_min);
                                g = 0.0;
                            }
                            if g > 0.0 {
                                params[i] -= rprop_delta[i];
                            } else if g < 0.0 {
                                params[i] += rprop_delta[i];
                            }
                            prev_grad[i] = g;
                        }
                        let lo = rprop_delta.iter().copied().fold(f64::INFINITY, f64::min);
                        let hi = rprop_delta.iter().copied().fold(0.0, f64::max);
                        tracker.history.rprop_step_bounds.push((lo, hi));
                    }
                }
                net.set_params(&params);
                current_mse = net.mse(train)?;
            }
            Algorithm::Lm | Algorithm::LmL2 => {
                let jac = net.jacobian(train)?;
                let params = net.params();
                let sse = sq_norm(&jac.residuals);
                let current = objective(&net, sse);
                let mut hessian = SquareMatrix::zeros(p);
                for i in 0..jac.rows {
                    hessian.rank_one_upper(jac.row(i), 1.0);
                }
                hessian.mirror_upper();
                let mut grad = jac.transpose_mul(&jac.residuals);
                if l2 > 0.0 {
                    for (i, (g, w)) in grad.iter_mut().zip(&params).enumerate() {
                        *g += l2 * w;
                        hessian.add_diag(i, l2);
                    }
                }
                accepted = false;
                loop {
                    let mut damped = hessian.clone();
                    for i in 0..p {
                        damped.add_diag(i, mu);
                    }
                    if let Ok(ch) = damped.cholesky() {
                        let step = ch.solve(&grad);
                        let trial: Vec<f64> = params.iter().zip(&step).map(|(w, s)| w - s).collect();
                        net.set_params(&trial);
                        let trial_sse = net.residuals(train)?.iter().map(|r| r * r).sum::<f64>();
                        let trial_obj = objective(&net, trial_sse);
                        if trial_obj < current {
                            accepted = true;
                            mu = (mu / 10.0).max(1e-20);
                            current_mse = trial_sse / n;
                            break;
                        }
                    }
                    mu *= 10.0;
                    if mu > trainer.mu_max {
                        net.set_params(&params);
                        break;
                    }
                }
            }
        }
        let val_mse = net.mse(val)?;
        let obj = objective(&net, current_mse * n);
        let exhausted = tracker.record(
            &net,
            EpochRecord {
                epoch,
                train_mse: current_mse,
                val_mse,
                step_accepted: accepted,
                objective: obj,
            },
            trainer.patience,
        )?;
        if !accepted {
            stop_reason = StopReason::DampingLimit;
            break;
        }
        if exhausted {
            stop_reason = StopReason::ValidationPatience;
            break;
        }
    }

    Ok(TrainedNetwork {
        network: tracker.best,
        best_epoch: tracker.best_epoch,
        best_val_mse: tracker.best_val,
        stop_reason,
        history: tracker.history,
    })
}

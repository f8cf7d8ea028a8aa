//! Deterministic training of the mask estimator on negative SI-SDR.
//!
//! The chain noisy → `Ψ y` → mask → `Ψᵀ` → overlap-add is linear after the
//! mask, so the loss gradient is pulled back through the overlap-add adjoint,
//! `Ψ`, and the elementwise product before entering the estimator.

use crate::error::{Error, Result};
use crate::framing::{overlap_add_adjoint, FramingConfig};
use crate::graph_basis::GraphBasis;
use crate::transform::{analyze, synthesize};

use super::loss::si_sdr_value_and_grad;
use super::mlp::{backward, forward_cached, normalized_features, Layer, MlpParams};

#[derive(Debug, Clone, PartialEq)]
pub struct Utterance {
    pub id: String,
    pub noisy: Vec<f64>,
    pub clean: Vec<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrainConfig {
    pub learning_rate: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub epsilon: f64,
    pub steps: usize,
    /// Utterances per step.
    pub batch_size: usize,
    pub seed: u64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            learning_rate: 1e-3,
            beta1: 0.9,
            beta2: 0.999,
            epsilon: 1e-8,
            steps: 200,
            batch_size: 1,
            seed: 0,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.learning_rate > 0.0) || self.steps == 0 || self.batch_size == 0 {
            return Err(Error::InvalidParameter(format!(
                "learning rate, steps and batch size must be positive (got {}, {}, {})",
                self.learning_rate, self.steps, self.batch_size
            )));
        }
        if !(0.0..1.0).contains(&self.beta1)
            || !(0.0..1.0).contains(&self.beta2)
            || !(self.epsilon > 0.0)
        {
            return Err(Error::InvalidParameter(
                "moment decay rates must lie in [0, 1) and epsilon must be positive".into(),
            ));
        }
        Ok(())
    }
}

/// First and second moment estimates for Adam.
#[derive(Debug, Clone, PartialEq)]
pub struct AdamState {
    pub m: Vec<Layer>,
    pub v: Vec<Layer>,
    pub step: u64,
}

impl AdamState {
    pub fn new(params: &MlpParams) -> Self {
        AdamState {
            m: params.zeros_like(),
            v: params.zeros_like(),
            step: 0,
        }
    }
}

/// Loss `−SI-SDR(ŝ, s)` for one utterance and its gradient with respect to every parameter.
pub fn chain_loss_and_grad(
    params: &MlpParams,
    utterance: &Utterance,
    basis: &GraphBasis,
    framing: &FramingConfig,
) -> Result<(f64, Vec<Layer>)> {
    params.check_basis(basis)?;
    params.validate()?;
    if utterance.noisy.len() != utterance.clean.len() {
        return Err(Error::LengthMismatch {
            left: utterance.noisy.len(),
            right: utterance.clean.len(),
        });
    }
    let noisy = analyze(&utterance.noisy, framing, basis)?;
    let features = normalized_features(&noisy, &utterance.noisy);
    let (mask, cache) = forward_cached(params, &features)?;
    let masked = noisy.with_coeffs(&mask * &noisy.coeffs)?;
    let estimate = synthesize(&masked, basis)?;

    let (score, grad_wave) = si_sdr_value_and_grad(&estimate, &utterance.clean)?;
    let grad_wave: Vec<f64> = grad_wave.iter().map(|g| -g).collect();
    let grad_frames = overlap_add_adjoint(&grad_wave, framing, utterance.noisy.len())?;
    // frames = coeffs·Ψ, so ∂L/∂coeffs = ∂L/∂frames·Ψᵀ.
    let grad_coeffs = grad_frames.dot(&basis.psi().t());
    let grad_mask = grad_coeffs * &noisy.coeffs;
    Ok((-score, backward(params, &cache, &grad_mask)))
}

fn all_finite(layers: &[Layer]) -> bool {
    layers
        .iter()
        .all(|l| l.weight.iter().chain(l.bias.iter()).all(|v| v.is_finite()))
}

/// One Adam update on the mean loss of `batch`; returns the pre-update loss.
pub fn train_step(
    params: &mut MlpParams,
    state: &mut AdamState,
    batch: &[Utterance],
    basis: &GraphBasis,
    framing: &FramingConfig,
    cfg: &TrainConfig,
) -> Result<f64> {
    cfg.validate()?;
    if batch.is_empty() {
        return Err(Error::EmptyInput("training batch"));
    }
    let mut total = 0.0;
    let mut grads = params.zeros_like();
    for utt in batch {
        let (loss, g) = chain_loss_and_grad(params, utt, basis, framing)?;
        total += loss;
        for (acc, gl) in grads.iter_mut().zip(g) {
            acc.weight += &gl.weight;
            acc.bias += &gl.bias;
        }
    }
    let scale = 1.0 / batch.len() as f64;
    let loss = total * scale;
    if !loss.is_finite() || !all_finite(&grads) {
        return Err(Error::Numerical(format!(
            "training diverged at step {} (loss {loss})",
            state.step
        )));
    }

    state.step += 1;
    let t = state.step as i32;
    let bias1 = 1.0 - cfg.beta1.powi(t);
    let bias2 = 1.0 - cfg.beta2.powi(t);
    let update = |p: &mut f64, g: f64, m: &mut f64, v: &mut f64| {
        let g = g * scale;
        *m = cfg.beta1 * *m + (1.0 - cfg.beta1) * g;
        *v = cfg.beta2 * *v + (1.0 - cfg.beta2) * g * g;
        let m_hat = *m / bias1;
        let v_hat = *v / bias2;
        *p -= cfg.learning_rate * m_hat / (v_hat.sqrt() + cfg.epsilon);
    };
    for (((layer, g), m), v) in params
        .layers
        .iter_mut()
        .zip(&grads)
        .zip(&mut state.m)
        .zip(&mut state.v)
    {
        ndarray::Zip::from(&mut layer.weight)
            .and(&g.weight)
            .and(&mut m.weight)
            .and(&mut v.weight)
            .for_each(|p, &g, m, v| update(p, g, m, v));
        ndarray::Zip::from(&mut layer.bias)
            .and(&g.bias)
            .and(&mut m.bias)
            .and(&mut v.bias)
            .for_each(|p, &g, m, v| update(p, g, m, v));
    }
    Ok(loss)
}

/// Per-step losses of a training run.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct TrainLog {
    pub losses: Vec<f64>,
}

/// Runs `cfg.steps` updates; step `s` uses utterances `s·B .. s·B + B` (cyclically).
pub fn train(
    params: &mut MlpParams,
    utterances: &[Utterance],
    basis: &GraphBasis,
    framing: &FramingConfig,
    cfg: &TrainConfig,
    mut on_step: impl FnMut(usize, f64),
) -> Result<TrainLog> {
    cfg.validate()?;
    if utterances.is_empty() {
        return Err(Error::EmptyInput("training set"));
    }
    let mut state = AdamState::new(params);
    let mut log = TrainLog::default();
    for step in 0..cfg.steps {
        let batch: Vec<Utterance> = (0..cfg.batch_size)
            .map(|i| utterances[(step * cfg.batch_size + i) % utterances.len()].clone())
            .collect();
        let loss = train_step(params, &mut state, &batch, basis, framing, cfg)?;
        on_step(step, loss);
        log.losses.push(loss);
    }
    Ok(log)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph_basis::{build_adjacency, decompose_svd};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn setup() -> (GraphBasis, FramingConfig, Utterance) {
        let basis = decompose_svd(&build_adjacency(32, 3).unwrap()).unwrap();
        let framing = FramingConfig::new(16000, 24, 6, 32, Default::default()).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let clean: Vec<f64> = (0..200).map(|i| (i as f64 * 0.21).sin() * 0.5).collect();
        let noisy = clean
            .iter()
            .map(|c| c + rng.random_range(-0.4..0.4))
            .collect();
        (
            basis,
            framing,
            Utterance {
                id: "toy".into(),
                noisy,
                clean,
            },
        )
    }

    #[test]
    fn chain_gradient_matches_finite_differences() {
        let (basis, framing, utt) = setup();
        let params = MlpParams::init(&[32, 16, 32], 2.0, 1, basis.fingerprint()).unwrap();
        let (_, grads) = chain_loss_and_grad(&params, &utt, &basis, &framing).unwrap();
        let loss = |p: &MlpParams| chain_loss_and_grad(p, &utt, &basis, &framing).unwrap().0;
        let h = 1e-6;
        for (li, r, c) in [
            (0, 0, 0),
            (0, 3, 7),
            (0, 15, 31),
            (1, 0, 0),
            (1, 10, 5),
            (1, 31, 15),
        ] {
            let mut plus = params.clone();
            plus.layers[li].weight[(r, c)] += h;
            let mut minus = params.clone();
            minus.layers[li].weight[(r, c)] -= h;
            let fd = (loss(&plus) - loss(&minus)) / (2.0 * h);
            let g = grads[li].weight[(r, c)];
            assert!(
                (fd - g).abs() <= 1e-3 * fd.abs().max(g.abs()).max(1e-6),
                "{fd} vs {g}"
            );
        }
    }

    #[test]
    fn training_is_reproducible() {
        let (basis, framing, utt) = setup();
        let cfg = TrainConfig {
            steps: 10,
            ..Default::default()
        };
        let run = || {
            let mut p = MlpParams::init(&[32, 16, 32], 2.0, 3, basis.fingerprint()).unwrap();
            train(
                &mut p,
                std::slice::from_ref(&utt),
                &basis,
                &framing,
                &cfg,
                |_, _| {},
            )
            .unwrap()
        };
        let a = run();
        let b = run();
        assert_eq!(a.losses.len(), 10);
        assert!(a
            .losses
            .iter()
            .zip(&b.losses)
            .all(|(x, y)| x.to_bits() == y.to_bits()));
    }

    #[test]
    fn rejects_foreign_basis_and_bad_config() {
        let (basis, framing, utt) = setup();
        let other = decompose_svd(&build_adjacency(32, 5).unwrap()).unwrap();
        let params = MlpParams::init(&[32, 16, 32], 2.0, 1, other.fingerprint()).unwrap();
        assert!(matches!(
            chain_loss_and_grad(&params, &utt, &basis, &framing),
            Err(Error::FingerprintMismatch { .. })
        ));
        let cfg = TrainConfig {
            learning_rate: 0.0,
            ..Default::default()
        };
        assert!(cfg.validate().is_err());
    }

    #[test]
    fn divergence_is_reported() {
        let (basis, framing, utt) = setup();
        let mut params = MlpParams::init(&[32, 16, 32], 2.0, 1, basis.fingerprint()).unwrap();
        params.layers[0].weight[(0, 0)] = f64::NAN;
        let mut state = AdamState::new(&params);
        let err = train_step(
            &mut params,
            &mut state,
            &[utt],
            &basis,
            &framing,
            &TrainConfig::default(),
        );
        assert!(matches!(err, Err(Error::Numerical(_))), "{err:?}");
    }
}

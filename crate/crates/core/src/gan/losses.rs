//! Adversarial objectives, all written as quantities to minimize.

use crate::error::Result;
use crate::linalg::{Tape, Var};
use crate::neural::MlpParams;

/// Discriminator loss `−mean ln D(x) − mean ln(1 − D(G(z)))`.
pub fn d_loss_gan(tape: &mut Tape, d_real: Var, d_fake: Var) -> Result<Var> {
    let log_real = tape.log(d_real)?;
    let real_term = tape.mean(log_real);
    let one_minus = tape.const_sub(1.0, d_fake);
    let log_fake = tape.log(one_minus)?;
    let fake_term = tape.mean(log_fake);
    let total = tape.add(real_term, fake_term)?;
    Ok(tape.neg(total))
}

/// Non-saturating generator loss `−mean ln D(G(z))`.
pub fn g_loss_nonsaturating(tape: &mut Tape, d_fake: Var) -> Result<Var> {
    let log_fake = tape.log(d_fake)?;
    let m = tape.mean(log_fake);
    Ok(tape.neg(m))
}

/// Saturating generator loss `mean ln(1 − D(G(z)))`, the direct minimax form.
pub fn g_loss_saturating(tape: &mut Tape, d_fake: Var) -> Result<Var> {
    let one_minus = tape.const_sub(1.0, d_fake);
    let log = tape.log(one_minus)?;
    Ok(tape.mean(log))
}

/// Conditional discriminator cost. Both sums carry the `1/(2m)` factor,
/// so this is half of [`d_loss_gan`] on the same outputs.
pub fn cgan_d_loss(tape: &mut Tape, d_real: Var, d_fake: Var) -> Result<Var> {
    let full = d_loss_gan(tape, d_real, d_fake)?;
    Ok(tape.scale(full, 0.5))
}

/// Conditional generator cost `−(1/m) Σ ln D(G(z, y), y)`.
pub fn cgan_g_loss(tape: &mut Tape, d_fake: Var) -> Result<Var> {
    g_loss_nonsaturating(tape, d_fake)
}

/// Critic loss `−(mean f(x) − mean f(G(z)))`; both sums averaged over the batch.
pub fn wgan_critic_loss(tape: &mut Tape, f_real: Var, f_fake: Var) -> Result<Var> {
    let real = tape.mean(f_real);
    let fake = tape.mean(f_fake);
    let gap = tape.sub(real, fake)?;
    Ok(tape.neg(gap))
}

/// Generator loss `−mean f(G(z))`.
pub fn wgan_g_loss(tape: &mut Tape, f_fake: Var) -> Var {
    let m = tape.mean(f_fake);
    tape.neg(m)
}

/// Copy of `params` with every entry clamped to `[−c, c]`.
pub fn clip_weights(params: &MlpParams, c: f64) -> MlpParams {
    let mut out = params.clone();
    clip_weights_in_place(&mut out, c);
    out
}

pub fn clip_weights_in_place(params: &mut MlpParams, c: f64) {
    params.tensors_mut().for_each(|m| m.map_inplace(|v| v.clamp(-c, c)));
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{Matrix, LOG_EPSILON};
    use crate::neural::{init_mlp, MlpSpec, OutputActivation};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use std::f64::consts::LN_2;

    fn eval2(f: impl Fn(&mut Tape, Var, Var) -> Result<Var>, a: Matrix, b: Matrix) -> f64 {
        let mut t = Tape::new();
        let a = t.leaf(a);
        let b = t.leaf(b);
        let l = f(&mut t, a, b).unwrap();
        t.scalar(l)
    }

    fn eval1(f: impl Fn(&mut Tape, Var) -> Result<Var>, a: Matrix) -> f64 {
        let mut t = Tape::new();
        let a = t.leaf(a);
        let l = f(&mut t, a).unwrap();
        t.scalar(l)
    }

    fn probs(rng: &mut ChaCha8Rng, n: usize) -> Matrix {
        Matrix::from_fn(n, 1, |_, _| rng.gen_range(0.001..0.999))
    }

    #[test]
    fn uninformative_discriminator() {
        let half = Matrix::filled(8, 1, 0.5);
        assert!((eval2(d_loss_gan, half.clone(), half.clone()) - 2.0 * LN_2).abs() < 1e-10);
        assert!((eval1(g_loss_nonsaturating, half.clone()) - LN_2).abs() < 1e-10);
        assert!((eval2(cgan_d_loss, half.clone(), half.clone()) - LN_2).abs() < 1e-10);
        assert!((eval1(cgan_g_loss, half) - LN_2).abs() < 1e-10);
    }

    #[test]
    fn perfect_discriminator_and_fooled_discriminator() {
        let eps = 1e-9;
        let real = Matrix::filled(4, 1, 1.0 - eps);
        let fake = Matrix::filled(4, 1, eps);
        assert!(eval2(d_loss_gan, real.clone(), fake).abs() < 1e-8);
        assert!(eval1(g_loss_nonsaturating, real).abs() < 1e-8);
    }

    #[test]
    fn losses_match_direct_summation() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let (r, f) = (probs(&mut rng, 13), probs(&mut rng, 13));
        let m = 13.0;
        let ln = |x: f64| (x + LOG_EPSILON).ln();
        let sum_real: f64 = r.as_slice().iter().map(|&v| ln(v)).sum();
        let sum_fake: f64 = f.as_slice().iter().map(|&v| ln(1.0 - v)).sum();
        let sum_g: f64 = f.as_slice().iter().map(|&v| ln(v)).sum();

        let d = eval2(d_loss_gan, r.clone(), f.clone());
        assert!((d - (-sum_real / m - sum_fake / m)).abs() < 1e-12);
        let cd = eval2(cgan_d_loss, r.clone(), f.clone());
        assert!((cd - (-(sum_real + sum_fake) / (2.0 * m))).abs() < 1e-12);
        let cg = eval1(cgan_g_loss, f.clone());
        assert!((cg - (-sum_g / m)).abs() < 1e-12);
    }

    #[test]
    fn single_condition_class_reduces_to_half_gan_loss() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let (r, f) = (probs(&mut rng, 9), probs(&mut rng, 9));
        let gan = eval2(d_loss_gan, r.clone(), f.clone());
        let cgan = eval2(cgan_d_loss, r, f);
        assert!((cgan - 0.5 * gan).abs() < 1e-15);
    }

    #[test]
    fn wasserstein_values() {
        let critic = |a: Matrix, b: Matrix| eval2(wgan_critic_loss, a, b);
        let same = Matrix::from_rows(&[[0.3], [-1.2], [4.0]]).unwrap();
        assert_eq!(critic(same.clone(), same), 0.0);
        let gap = critic(Matrix::filled(5, 1, 1.0), Matrix::filled(5, 1, -1.0));
        assert_eq!(-gap, 2.0);

        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let fr = Matrix::from_fn(11, 1, |_, _| rng.gen_range(-3.0..3.0));
        let ff = Matrix::from_fn(11, 1, |_, _| rng.gen_range(-3.0..3.0));
        let direct = -(fr.as_slice().iter().sum::<f64>() / 11.0 - ff.as_slice().iter().sum::<f64>() / 11.0);
        assert!((critic(fr, ff.clone()) - direct).abs() < 1e-12);
        let g = eval1(|t, v| Ok(wgan_g_loss(t, v)), ff.clone());
        assert!((g + ff.as_slice().iter().sum::<f64>() / 11.0).abs() < 1e-12);
    }

    #[test]
    fn clipping() {
        let spec = MlpSpec::new(vec![2, 3, 1], 0.2, OutputActivation::Linear, 0.0).unwrap();
        let mut p = init_mlp(&spec, 0);
        p.layers[0].weight.set(0, 0, 0.7);
        let clipped = clip_weights(&p, 0.01);
        assert_eq!(clipped.layers[0].weight.get(0, 0), 0.01);
        assert!(clipped.max_abs() <= 0.01);
        assert_eq!(clip_weights(&clipped, 0.01), clipped);
        let small = clip_weights(&p, 0.001);
        let again = clip_weights(&small, 10.0);
        assert_eq!(again, small);
    }
}

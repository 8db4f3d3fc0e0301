use nalgebra::{Complex, DMatrix};

use super::{alpha, beta, JointSpectrum, ModelKind, ModelSpec};
use crate::config::Tolerances;
use crate::error::{Error, Result};

type C = Complex<f64>;
type M = DMatrix<C>;

fn re(v: f64) -> C {
    C::new(v, 0.0)
}

/// X, Y, Z of a spin of dimension n on the basis e_0..e_{n-1}.
fn spin_xyz(n: usize) -> (M, M, M) {
    let s = 1.0 / n as f64;
    let mut x = M::zeros(n, n);
    let mut y = M::zeros(n, n);
    let mut z = M::zeros(n, n);
    for l in 0..n {
        z[(l, l)] = re((n as f64 - 1.0 - 2.0 * l as f64) * s);
        if l > 0 {
            x[(l - 1, l)] = re(alpha(l, n) * s);
            y[(l - 1, l)] = C::new(0.0, alpha(l, n) * s);
        }
        if l + 1 < n {
            x[(l + 1, l)] = re(beta(l, n) * s);
            y[(l + 1, l)] = C::new(0.0, -beta(l, n) * s);
        }
    }
    (x, y, z)
}

type Dense = (M, M, Vec<usize>, Box<dyn Fn(f64) -> i64>);

// J, H, the states away from the truncation edge, and the block id of a J value.
fn dense_operators(model: &ModelSpec, k: u32, n_max: usize) -> Result<Dense> {
    model.validate()?;
    let kf = k as f64;
    Ok(match model.kind {
        ModelKind::SpinOscillator => {
            let dim = 2 * k as usize;
            let nb = n_max + 1;
            let mut w = M::zeros(nb, nb);
            let mut num = M::zeros(nb, nb);
            for n in 0..nb {
                num[(n, n)] = re((n as f64 + 0.5) / kf);
                if n + 1 < nb {
                    w[(n + 1, n)] = re(((n as f64 + 1.0) / kf).sqrt());
                }
            }
            let (x, y, z) = spin_xyz(dim);
            let i = C::new(0.0, 1.0);
            let raise = &x + &y * i;
            let lower = &x - &y * i;
            let j = num.kronecker(&M::identity(dim, dim)) + M::identity(nb, nb).kronecker(&z);
            let h = (w.kronecker(&raise) + w.adjoint().kronecker(&lower))
                * re(1.0 / (2.0 * std::f64::consts::SQRT_2));
            let interior = (0..nb * dim).filter(|idx| idx / dim < n_max).collect();
            (j, h, interior, Box::new(move |jv: f64| ((jv - 1.0) * kf).round() as i64))
        }
        ModelKind::CoupledAngularMomenta => {
            let (n1, n2) = model.sphere_dims(k)?;
            let (x1, y1, z1) = spin_xyz(n1);
            let (x2, y2, z2) = spin_xyz(n2);
            let id1 = M::identity(n1, n1);
            let id2 = M::identity(n2, n2);
            let j = z1.kronecker(&id2) * re(model.r1) + id1.kronecker(&z2) * re(model.r2);
            let h = z1.kronecker(&id2) * re(1.0 - model.t)
                + (x1.kronecker(&x2) + y1.kronecker(&y2) + z1.kronecker(&z2)) * re(model.t);
            let top = (n1 + n2 - 2) as f64;
            (j, h, (0..n1 * n2).collect(), Box::new(move |jv: f64| (kf * jv + top / 2.0).round() as i64))
        }
    })
}

fn commutator_norm(j: &M, h: &M, interior: &[usize]) -> f64 {
    let comm = j * h - h * j;
    let mut norm2 = 0.0;
    for &a in interior {
        for &b in interior {
            norm2 += comm[(a, b)].norm_sqr();
        }
    }
    norm2.sqrt()
}

/// Frobenius norm of [J, H] restricted to the states away from the truncation.
pub fn dense_commutator_norm(model: &ModelSpec, k: u32, n_max: usize) -> Result<f64> {
    let (j, h, interior, _) = dense_operators(model, k, n_max)?;
    Ok(commutator_norm(&j, &h, &interior))
}

/// Brute-force joint spectrum from dense J and H on the full (truncated) product space.
///
/// For the spin-oscillator only the blocks that fit entirely below the
/// truncation n <= n_max are returned.
pub fn dense_oracle_spectrum(model: &ModelSpec, k: u32, n_max: usize) -> Result<JointSpectrum> {
    let tol = Tolerances::default();
    let (j, h, interior, block_of) = dense_operators(model, k, n_max)?;
    let norm = commutator_norm(&j, &h, &interior);
    if norm > tol.commutator {
        return Err(Error::CommutatorViolation { norm });
    }

    let ej = j.clone().symmetric_eigen();
    let mut order: Vec<usize> = (0..ej.eigenvalues.len()).collect();
    order.sort_by(|&a, &b| ej.eigenvalues[a].total_cmp(&ej.eigenvalues[b]));
    let mut groups: Vec<Vec<usize>> = Vec::new();
    for &i in &order {
        match groups.last_mut() {
            Some(g) if (ej.eigenvalues[i] - ej.eigenvalues[g[0]]).abs() < 1e-8 => g.push(i),
            _ => groups.push(vec![i]),
        }
    }

    let max_block = match model.kind {
        ModelKind::SpinOscillator => n_max as i64 - (2 * k as i64 - 1),
        ModelKind::CoupledAngularMomenta => i64::MAX,
    };
    let mut solved = Vec::new();
    for g in groups {
        let jv = g.iter().map(|&i| ej.eigenvalues[i]).sum::<f64>() / g.len() as f64;
        let block_id = block_of(jv);
        if block_id > max_block {
            continue;
        }
        let v = ej.eigenvectors.select_columns(&g);
        let hp = v.adjoint() * &h * &v;
        let mut ys: Vec<f64> = hp.symmetric_eigen().eigenvalues.iter().copied().collect();
        ys.sort_by(|a, b| a.total_cmp(b));
        solved.push((block_id, jv, ys));
    }
    Ok(JointSpectrum::from_blocks(k, solved, None))
}

//! Entry-by-entry drift of the moment equations with nested vectors and one
//! explicit loop per decay channel. Shares no code with the library.

use ising_traj::C64;

pub struct OracleInput<'a> {
    pub n: usize,
    pub gamma: f64,
    pub eta: f64,
    pub pump: f64,
    /// Row-major couplings.
    pub j: &'a [f64],
    pub alpha: &'a [C64],
    pub u: &'a [C64],
    pub v: &'a [C64],
    /// Weight channel 1 by the row mode's rate instead of the summed mode's.
    pub row_damping: bool,
}

pub struct OracleDrift {
    pub alpha: Vec<C64>,
    pub u: Vec<Vec<C64>>,
    pub v: Vec<Vec<C64>>,
}

fn c(re: f64) -> C64 {
    C64::new(re, 0.0)
}

pub fn drift(inp: &OracleInput) -> OracleDrift {
    let n = inp.n;
    let jm: Vec<Vec<f64>> = (0..n).map(|a| (0..n).map(|b| inp.j[a * n + b]).collect()).collect();
    let al = inp.alpha;
    let u: Vec<Vec<C64>> = (0..n).map(|a| (0..n).map(|b| inp.u[a * n + b]).collect()).collect();
    let v: Vec<Vec<C64>> = (0..n).map(|a| (0..n).map(|b| inp.v[a * n + b]).collect()).collect();
    let (gamma, eta, g) = (inp.gamma, inp.eta, inp.pump);
    let r: Vec<f64> = (0..n).map(|i| gamma - (0..n).map(|k| jm[i][k].abs()).sum::<f64>()).collect();
    let delta = |a: usize, b: usize| if a == b { 1.0 } else { 0.0 };

    let mut d_alpha = vec![c(0.0); n];
    for i in 0..n {
        let mut coup = c(0.0);
        for j in 0..n {
            coup += c(0.5 * jm[j][i]) * al[j];
        }
        d_alpha[i] = c(-0.5 * gamma) * al[i] + c(g) * al[i].conj()
            - c(eta) * (c(al[i].norm_sqr()) * al[i] + c(2.0) * al[i] * v[i][i] + al[i].conj() * u[i][i])
            + coup;
    }

    let mut du = vec![vec![c(0.0); n]; n];
    let mut dv = vec![vec![c(0.0); n]; n];
    for a in 0..n {
        for b in 0..n {
            // Linear loss and coupling: M = -gamma/2 + J/2 on both indices.
            let mut lu = c(-gamma) * u[a][b];
            let mut lv = c(-gamma) * v[a][b];
            for k in 0..n {
                lu += c(0.5 * jm[a][k]) * u[k][b] + c(0.5 * jm[b][k]) * u[a][k];
                lv += c(0.5 * jm[a][k]) * v[k][b] + c(0.5 * jm[b][k]) * v[a][k];
            }
            lu += c(g) * (v[a][b] + v[b][a] + c(delta(a, b)));
            lv += c(g) * (u[a][b].conj() + u[a][b]);

            let (aa, ab) = (al[a], al[b]);
            lu -= c(eta)
                * (u[a][a] * (v[a][b] + c(delta(a, b)))
                    + c(2.0) * u[a][b] * v[a][a]
                    + aa * aa * (v[a][b] + c(delta(a, b)))
                    + c(2.0 * aa.norm_sqr()) * u[a][b]);
            lu -= c(eta)
                * (u[b][b] * v[b][a] + c(2.0) * u[a][b] * v[b][b] + ab * ab * v[b][a] + c(2.0 * ab.norm_sqr()) * u[a][b]);
            lv -= c(eta)
                * (u[a][a].conj() * u[a][b]
                    + c(2.0) * v[a][a] * v[a][b]
                    + c(2.0 * aa.norm_sqr()) * v[a][b]
                    + aa.conj() * aa.conj() * u[a][b]);
            lv -= c(eta)
                * (u[b][b] * u[a][b].conj()
                    + c(2.0) * v[b][b] * v[a][b]
                    + c(2.0 * ab.norm_sqr()) * v[a][b]
                    + ab * ab * u[a][b].conj());
            du[a][b] = lu;
            dv[a][b] = lv;
        }
    }

    // Measurement backaction: a channel adding A dZ + B dZ* to alpha removes
    // (A_a B_b + A_b B_a) from u and (A_a^* A_b + B_a^* B_b) from v.
    let mut backaction = |a_vec: &[C64], b_vec: &[C64], weight_row: Option<&[f64]>| {
        for a in 0..n {
            for b in 0..n {
                let w = weight_row.map_or(1.0, |w| w[a]);
                du[a][b] -= c(w) * (a_vec[a] * b_vec[b] + a_vec[b] * b_vec[a]);
                dv[a][b] -= c(w) * (a_vec[a].conj() * a_vec[b] + b_vec[a].conj() * b_vec[b]);
            }
        }
    };
    for k in 0..n {
        let (amp, row) = if inp.row_damping { (1.0, Some(&r[..])) } else { (r[k].sqrt(), None) };
        let a_vec: Vec<C64> = (0..n).map(|m| c(amp) * v[k][m]).collect();
        let b_vec: Vec<C64> = (0..n).map(|m| c(amp) * u[m][k]).collect();
        backaction(&a_vec, &b_vec, row);
    }
    for k in 0..n {
        let s = 2.0 * eta.sqrt();
        let a_vec: Vec<C64> = (0..n).map(|m| c(s) * al[k].conj() * v[k][m]).collect();
        let b_vec: Vec<C64> = (0..n).map(|m| c(s) * al[k] * u[m][k]).collect();
        backaction(&a_vec, &b_vec, None);
    }
    for i in 0..n {
        for j in 0..i {
            let x = jm[i][j];
            if x == 0.0 {
                continue;
            }
            let (amp, s) = (x.abs().sqrt(), x.signum());
            let a_vec: Vec<C64> = (0..n).map(|m| c(amp) * (v[i][m] - c(s) * v[j][m])).collect();
            let b_vec: Vec<C64> = (0..n).map(|m| c(amp) * (u[m][i] - c(s) * u[m][j])).collect();
            backaction(&a_vec, &b_vec, None);
        }
    }
    OracleDrift { alpha: d_alpha, u: du, v: dv }
}

/// Largest deviation between the oracle and flat row-major library output,
/// relative to `max(1, |oracle|)`.
pub fn max_deviation(o: &OracleDrift, alpha: &[C64], u: &[C64], v: &[C64]) -> f64 {
    let n = o.alpha.len();
    let mut scale: f64 = 1.0;
    let mut dev: f64 = 0.0;
    for a in 0..n {
        scale = scale.max(o.alpha[a].norm());
        dev = dev.max((o.alpha[a] - alpha[a]).norm());
        for b in 0..n {
            scale = scale.max(o.u[a][b].norm()).max(o.v[a][b].norm());
            dev = dev.max((o.u[a][b] - u[a * n + b]).norm()).max((o.v[a][b] - v[a * n + b]).norm());
        }
    }
    dev / scale
}

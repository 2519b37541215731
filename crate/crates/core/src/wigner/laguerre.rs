//! Associated Laguerre polynomials and the normalized displacement kernel.

/// `L_n^k(x)` by the upward three-term recurrence in `n`.
pub fn laguerre_assoc(n: usize, k: usize, x: f64) -> f64 {
    let kf = k as f64;
    let mut prev = 1.0;
    if n == 0 {
        return prev;
    }
    let mut cur = 1.0 + kf - x;
    for j in 1..n {
        let jf = j as f64;
        let next = ((2.0 * jf + 1.0 + kf - x) * cur - (jf + kf) * prev) / (jf + 1.0);
        prev = cur;
        cur = next;
    }
    cur
}

/// `L_0^k(x) ..= L_nmax^k(x)` in one recurrence pass.
pub fn laguerre_column(nmax: usize, k: usize, x: f64) -> Vec<f64> {
    let kf = k as f64;
    let mut out = Vec::with_capacity(nmax + 1);
    out.push(1.0);
    if nmax == 0 {
        return out;
    }
    out.push(1.0 + kf - x);
    for j in 1..nmax {
        let jf = j as f64;
        let next = ((2.0 * jf + 1.0 + kf - x) * out[j] - (jf + kf) * out[j - 1]) / (jf + 1.0);
        out.push(next);
    }
    out
}

/// `ln(k!)` for `k = 0..=n`.
pub(crate) fn ln_factorials(n: usize) -> Vec<f64> {
    let mut out = Vec::with_capacity(n + 1);
    let mut acc = 0.0;
    out.push(0.0);
    for k in 1..=n {
        acc += (k as f64).ln();
        out.push(acc);
    }
    out
}

/// Recurrence coefficients for the normalized displacement matrix elements
///
/// `f_n^k(x) = sqrt(n!/(n+k)!) x^{k/2} e^{-x/2} L_n^k(x)`,
///
/// which are the moduli of `<n+k|D(zeta)|n>` at `x = |zeta|^2` and never
/// exceed one. The Laguerre recurrence rewritten for `f` reads
///
/// `f_{n+1} = ((2n+1+k-x) f_n - sqrt(n(n+k)) f_{n-1}) / sqrt((n+1)(n+k+1))`.
#[derive(Debug, Clone)]
pub struct DisplacementKernel {
    cutoff: usize,
    /// Band `k` starts at `offsets[k]` and holds `cutoff + 1 - k` entries.
    offsets: Vec<usize>,
    lower: Vec<f64>,
    inv_norm: Vec<f64>,
    half_ln_fact: Vec<f64>,
}

impl DisplacementKernel {
    pub fn new(cutoff: usize) -> Self {
        let mut offsets = Vec::with_capacity(cutoff + 2);
        let mut lower = Vec::new();
        let mut inv_norm = Vec::new();
        let mut off = 0;
        for k in 0..=cutoff {
            offsets.push(off);
            let len = cutoff + 1 - k;
            for n in 0..len {
                lower.push(((n * (n + k)) as f64).sqrt());
                inv_norm.push((((n + 1) * (n + k + 1)) as f64).sqrt().recip());
            }
            off += len;
        }
        offsets.push(off);
        let half_ln_fact = ln_factorials(cutoff).into_iter().map(|v| 0.5 * v).collect();
        Self {
            cutoff,
            offsets,
            lower,
            inv_norm,
            half_ln_fact,
        }
    }

    pub fn cutoff(&self) -> usize {
        self.cutoff
    }

    /// Total number of `(n, k)` entries, `(N+1)(N+2)/2`.
    pub fn len(&self) -> usize {
        self.offsets[self.cutoff + 1]
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn band_offset(&self, k: usize) -> usize {
        self.offsets[k]
    }

    /// Fills `out` (length [`Self::len`]) with `f_n^k(x)`, band by band.
    pub fn fill(&self, x: f64, out: &mut [f64]) {
        debug_assert_eq!(out.len(), self.len());
        let ln_u = 0.5 * x.ln();
        for k in 0..=self.cutoff {
            let off = self.offsets[k];
            let len = self.cutoff + 1 - k;
            let band = &mut out[off..off + len];
            let f0 = if k == 0 {
                (-0.5 * x).exp()
            } else if x == 0.0 {
                0.0
            } else {
                (k as f64 * ln_u - 0.5 * x - self.half_ln_fact[k]).exp()
            };
            band[0] = f0;
            if len == 1 {
                continue;
            }
            let lower = &self.lower[off..off + len];
            let inv = &self.inv_norm[off..off + len];
            let kf = k as f64;
            let mut prev = 0.0;
            let mut cur = f0;
            for n in 0..len - 1 {
                let next = ((2.0 * n as f64 + 1.0 + kf - x) * cur - lower[n] * prev) * inv[n];
                band[n + 1] = next;
                prev = cur;
                cur = next;
            }
        }
    }

    pub fn evaluate(&self, x: f64) -> Vec<f64> {
        let mut out = vec![0.0; self.len()];
        self.fill(x, &mut out);
        out
    }
}

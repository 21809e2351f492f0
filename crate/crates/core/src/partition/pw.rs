//! Piecewise polynomials on the real line, the workhorse of the exact
//! one-dimensional partition-function recursions. A `Pw` is zero left of its
//! first breakpoint, a local polynomial on each piece, and constant after the
//! last breakpoint.

/// Piecewise polynomial. `coeffs[j]` are the coefficients of the local
/// polynomial on `[breaks[j], breaks[j+1])` in powers of `t - breaks[j]`;
/// the function is 0 on `(-inf, breaks[0])` and `tail` on `[last, inf)`.
#[derive(Clone, Debug)]
pub struct Pw {
    pub breaks: Vec<f64>,
    pub coeffs: Vec<Vec<f64>>,
    pub tail: f64,
}

fn eval_local(c: &[f64], x: f64) -> f64 {
    let mut acc = 0.0;
    for &ck in c.iter().rev() {
        acc = acc * x + ck;
    }
    acc
}

/// Rebase `p(x)` to `p(y + delta)`.
fn shift_local(c: &[f64], delta: f64) -> Vec<f64> {
    let n = c.len();
    let mut out = vec![0.0; n];
    // binomial expansion of (y + delta)^k
    for (k, &ck) in c.iter().enumerate() {
        let mut binom = 1.0f64;
        let mut pow = 1.0f64;
        for j in (0..=k).rev() {
            out[j] += ck * binom * pow;
            if j > 0 {
                binom = binom * j as f64 / (k - j + 1) as f64;
                pow *= delta;
            }
        }
    }
    out
}

impl Pw {
    pub fn zero() -> Pw {
        Pw {
            breaks: vec![0.0],
            coeffs: vec![],
            tail: 0.0,
        }
    }

    pub fn value(&self, t: f64) -> f64 {
        if self.breaks.is_empty() || t < self.breaks[0] {
            return 0.0;
        }
        if t >= *self.breaks.last().unwrap() {
            return self.tail;
        }
        let j = self.breaks.partition_point(|&b| b <= t) - 1;
        eval_local(&self.coeffs[j], t - self.breaks[j])
    }

    /// Value at +infinity (densities vanish there, antiderivatives plateau).
    pub fn at_end(&self) -> f64 {
        self.tail
    }

    /// Shift the graph right by `delta`.
    pub fn shifted(&self, delta: f64) -> Pw {
        Pw {
            breaks: self.breaks.iter().map(|b| b + delta).collect(),
            coeffs: self.coeffs.clone(),
            tail: self.tail,
        }
    }

    pub fn scaled(&self, s: f64) -> Pw {
        Pw {
            breaks: self.breaks.clone(),
            coeffs: self
                .coeffs
                .iter()
                .map(|c| c.iter().map(|&x| x * s).collect())
                .collect(),
            tail: self.tail * s,
        }
    }

    /// Running integral from -infinity; continuous, constant past the end.
    pub fn antiderivative(&self) -> Pw {
        let mut coeffs = Vec::with_capacity(self.coeffs.len());
        let mut acc = 0.0;
        for (j, c) in self.coeffs.iter().enumerate() {
            let mut a = vec![0.0; c.len() + 1];
            a[0] = acc;
            for (k, &ck) in c.iter().enumerate() {
                a[k + 1] = ck / (k + 1) as f64;
            }
            let width = self.breaks[j + 1] - self.breaks[j];
            acc = eval_local(&a, width);
            coeffs.push(a);
        }
        Pw {
            breaks: self.breaks.clone(),
            coeffs,
            tail: acc,
        }
    }

    /// Pointwise `self + other`.
    pub fn add(&self, other: &Pw) -> Pw {
        let mut breaks: Vec<f64> = self
            .breaks
            .iter()
            .chain(other.breaks.iter())
            .copied()
            .collect();
        breaks.sort_by(|a, b| a.partial_cmp(b).unwrap());
        breaks.dedup();
        let mut coeffs = Vec::with_capacity(breaks.len().saturating_sub(1));
        for j in 0..breaks.len() - 1 {
            let a = breaks[j];
            let left = self.local_at(a);
            let right = other.local_at(a);
            let n = left.len().max(right.len()).max(1);
            let mut c = vec![0.0; n];
            for (k, v) in left.iter().enumerate() {
                c[k] += v;
            }
            for (k, v) in right.iter().enumerate() {
                c[k] += v;
            }
            coeffs.push(c);
        }
        Pw {
            breaks,
            coeffs,
            tail: self.tail + other.tail,
        }
    }

    /// Local coefficients of the piece containing `t`, rebased around `t`.
    fn local_at(&self, t: f64) -> Vec<f64> {
        if self.breaks.is_empty() || t < self.breaks[0] {
            return vec![0.0];
        }
        if t >= *self.breaks.last().unwrap() {
            return vec![self.tail];
        }
        let j = self.breaks.partition_point(|&b| b <= t) - 1;
        shift_local(&self.coeffs[j], t - self.breaks[j])
    }

    /// Zero the function outside `mask` (sorted disjoint intervals).
    pub fn restricted(&self, mask: &[(f64, f64)]) -> Pw {
        if mask.is_empty() {
            return Pw::zero();
        }
        let mut breaks: Vec<f64> = self.breaks.clone();
        for &(a, b) in mask {
            breaks.push(a);
            breaks.push(b);
        }
        breaks.sort_by(|a, b| a.partial_cmp(b).unwrap());
        breaks.dedup();
        let mut coeffs = Vec::with_capacity(breaks.len().saturating_sub(1));
        for j in 0..breaks.len() - 1 {
            let mid = 0.5 * (breaks[j] + breaks[j + 1]);
            if mask.iter().any(|&(a, b)| a <= mid && mid < b) {
                coeffs.push(self.local_at(breaks[j]));
            } else {
                coeffs.push(vec![0.0]);
            }
        }
        Pw {
            breaks,
            coeffs,
            tail: 0.0,
        }
    }

    /// `∫_{-inf}^t 1_mask(s) f(s) ds` in one pass: restrict then integrate.
    pub fn masked_antiderivative(&self, mask: &[(f64, f64)]) -> Pw {
        self.restricted(mask).antiderivative()
    }

    /// The constant-one function turned into `∫_{-inf}^t 1_mask`.
    pub fn mask_measure(mask: &[(f64, f64)]) -> Pw {
        if mask.is_empty() {
            return Pw::zero();
        }
        let mut breaks = Vec::with_capacity(2 * mask.len());
        for &(a, b) in mask {
            breaks.push(a);
            breaks.push(b);
        }
        let mut coeffs = Vec::with_capacity(breaks.len() - 1);
        let mut acc = 0.0;
        for j in 0..breaks.len() - 1 {
            if j % 2 == 0 {
                coeffs.push(vec![acc, 1.0]);
                acc += breaks[j + 1] - breaks[j];
            } else {
                coeffs.push(vec![acc]);
            }
        }
        Pw {
            breaks,
            coeffs,
            tail: acc,
        }
    }
}

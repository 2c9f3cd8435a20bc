//! State-space realizations and zero-order-hold simulation.

use nalgebra::{DMatrix, DVector};

use super::polynomial::Polynomial;
use super::rational::RationalTf;
use crate::error::{Error, Result};

/// Single-input single-output `x' = A x + B u`, `y = C x + D u`.
#[derive(Debug, Clone, PartialEq)]
pub struct StateSpace {
    a: DMatrix<f64>,
    b: DVector<f64>,
    c: DVector<f64>,
    d: f64,
}

impl StateSpace {
    pub fn new(a: DMatrix<f64>, b: DVector<f64>, c: DVector<f64>, d: f64) -> Result<Self> {
        let n = a.nrows();
        if a.ncols() != n || b.len() != n || c.len() != n {
            return Err(Error::invalid(format!(
                "inconsistent dimensions: A {}x{}, B {}, C {}",
                a.nrows(),
                a.ncols(),
                b.len(),
                c.len()
            )));
        }
        Ok(Self { a, b, c, d })
    }

    /// Controllable canonical realization of a proper, delay-free system.
    pub fn from_tf(sys: &RationalTf) -> Result<Self> {
        if !sys.is_proper() {
            return Err(Error::Improper {
                num: sys.num().degree(),
                den: sys.den().degree(),
            });
        }
        if sys.delay() > 0.0 {
            return Err(Error::invalid(
                "system has a pure delay; rationalize it (Pade) before building a state-space model",
            ));
        }
        let n = sys.den().degree();
        let d = sys.feedthrough();
        let sp = sys.strictly_proper_part()?;
        let den = sys.den().coeffs();
        let mut a = DMatrix::zeros(n, n);
        for i in 0..n.saturating_sub(1) {
            a[(i, i + 1)] = 1.0;
        }
        for j in 0..n {
            a[(n - 1, j)] = -den[j];
        }
        let mut b = DVector::zeros(n);
        if n > 0 {
            b[n - 1] = 1.0;
        }
        let c = DVector::from_fn(n, |j, _| sp.num().coeff(j));
        Ok(Self { a, b, c, d })
    }

    pub fn order(&self) -> usize {
        self.a.nrows()
    }

    pub fn a(&self) -> &DMatrix<f64> {
        &self.a
    }

    pub fn b(&self) -> &DVector<f64> {
        &self.b
    }

    pub fn c(&self) -> &DVector<f64> {
        &self.c
    }

    pub fn d(&self) -> f64 {
        self.d
    }

    /// Diagonal similarity transform that equalizes row and column norms of `A`.
    pub fn balanced(&self) -> Self {
        let n = self.order();
        let mut scale = vec![1.0f64; n];
        let mut a = self.a.clone();
        let radix = 2.0f64;
        loop {
            let mut done = true;
            for i in 0..n {
                let mut c = 0.0;
                let mut r = 0.0;
                for j in 0..n {
                    if j != i {
                        c += a[(j, i)].abs();
                        r += a[(i, j)].abs();
                    }
                }
                if c == 0.0 || r == 0.0 {
                    continue;
                }
                let s = c + r;
                let mut f = 1.0;
                let mut cc = c;
                let mut rr = r;
                while cc < rr / radix {
                    cc *= radix;
                    rr /= radix;
                    f *= radix;
                }
                while cc >= rr * radix {
                    cc /= radix;
                    rr *= radix;
                    f /= radix;
                }
                if (cc + rr) < 0.95 * s {
                    done = false;
                    scale[i] *= f;
                    for j in 0..n {
                        a[(i, j)] /= f;
                        a[(j, i)] *= f;
                    }
                }
            }
            if done {
                break;
            }
        }
        // x = D x̃: Ã = D⁻¹ A D, B̃ = D⁻¹ B, C̃ = C D
        let b = DVector::from_fn(n, |i, _| self.b[i] / scale[i]);
        let c = DVector::from_fn(n, |i, _| self.c[i] * scale[i]);
        Self { a, b, c, d: self.d }
    }

    /// Transfer function by the Faddeev-LeVerrier recursion.
    pub fn to_tf(&self) -> Result<RationalTf> {
        let n = self.order();
        if n == 0 {
            return Ok(RationalTf::gain(self.d));
        }
        // det(sI - A) = Σ c_k s^k, adj(sI - A) = Σ_{k=1..n} M_k s^{n-k}
        let mut charpoly = vec![0.0; n + 1];
        charpoly[n] = 1.0;
        let mut num = vec![0.0; n];
        let mut m = DMatrix::<f64>::zeros(n, n);
        let eye = DMatrix::<f64>::identity(n, n);
        for k in 1..=n {
            m = &self.a * &m + &eye * charpoly[n - k + 1];
            num[n - k] = (self.c.transpose() * &m * &self.b)[(0, 0)];
            charpoly[n - k] = -(&self.a * &m).trace() / k as f64;
        }
        let den = Polynomial::new(charpoly);
        let num = &Polynomial::new(num) + &den.scale(self.d);
        RationalTf::new(num, den)
    }

    /// Exact zero-order-hold discretization `(Φ, Γ)`.
    pub fn zoh(&self, ts: f64) -> (DMatrix<f64>, DVector<f64>) {
        let n = self.order();
        let mut m = DMatrix::<f64>::zeros(n + 1, n + 1);
        m.view_mut((0, 0), (n, n)).copy_from(&(&self.a * ts));
        m.view_mut((0, n), (n, 1)).copy_from(&(&self.b * ts));
        let e = m.exp();
        let phi = e.view((0, 0), (n, n)).into_owned();
        let gamma = DVector::from_fn(n, |i, _| e[(i, n)]);
        (phi, gamma)
    }
}

/// Zero-state response to a sampled input held constant over each period.
pub fn simulate(sys: &RationalTf, input: &[f64], ts: f64) -> Result<Vec<f64>> {
    if !(ts > 0.0) || !ts.is_finite() {
        return Err(Error::invalid(format!(
            "sampling period must be > 0, got {ts}"
        )));
    }
    let ss = StateSpace::from_tf(sys)?.balanced();
    let n = ss.order();
    if n == 0 {
        return Ok(input.iter().map(|u| ss.d * u).collect());
    }
    let (phi, gamma) = ss.zoh(ts);
    if phi.iter().chain(gamma.iter()).any(|v| !v.is_finite()) {
        return Err(Error::Numerical("matrix exponential overflowed".into()));
    }
    let mut x = DVector::<f64>::zeros(n);
    let mut out = Vec::with_capacity(input.len());
    for &u in input {
        out.push(ss.c.dot(&x) + ss.d * u);
        x = &phi * &x + &gamma * u;
    }
    Ok(out)
}

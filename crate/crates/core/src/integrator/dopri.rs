//! Dormand-Prince 5(4) pair with FSAL and Hairer's continuous extension,
//! specialised to autonomous systems in four unknowns.

use crate::geometry::sum3;

pub(crate) type State = [f64; 4];

const A21: f64 = 1.0 / 5.0;
const A31: f64 = 3.0 / 40.0;
const A32: f64 = 9.0 / 40.0;
const A41: f64 = 44.0 / 45.0;
const A42: f64 = -56.0 / 15.0;
const A43: f64 = 32.0 / 9.0;
const A51: f64 = 19372.0 / 6561.0;
const A52: f64 = -25360.0 / 2187.0;
const A53: f64 = 64448.0 / 6561.0;
const A54: f64 = -212.0 / 729.0;
const A61: f64 = 9017.0 / 3168.0;
const A62: f64 = -355.0 / 33.0;
const A63: f64 = 46732.0 / 5247.0;
const A64: f64 = 49.0 / 176.0;
const A65: f64 = -5103.0 / 18656.0;
const A71: f64 = 35.0 / 384.0;
const A73: f64 = 500.0 / 1113.0;
const A74: f64 = 125.0 / 192.0;
const A75: f64 = -2187.0 / 6784.0;
const A76: f64 = 11.0 / 84.0;

const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;

const D1: f64 = -12715105075.0 / 11282082432.0;
const D3: f64 = 87487479700.0 / 32700410799.0;
const D4: f64 = -10690763975.0 / 1880347072.0;
const D5: f64 = 701980252875.0 / 199316789632.0;
const D6: f64 = -1453857185.0 / 822651844.0;
const D7: f64 = 69997945.0 / 29380423.0;

/// Continuous extension of one accepted step, evaluated at `theta` in [0, 1].
#[derive(Debug, Clone, Copy, PartialEq)]
pub(crate) struct Dense {
    pub rcont: [State; 5],
}

impl Dense {
    pub fn eval(&self, theta: f64) -> State {
        let t1 = 1.0 - theta;
        let r = &self.rcont;
        let mut out = [0.0; 4];
        for i in 0..4 {
            out[i] = r[0][i] + theta * (r[1][i] + t1 * (r[2][i] + theta * (r[3][i] + t1 * r[4][i])));
        }
        out
    }
}

pub(crate) struct StepResult {
    pub y_new: State,
    pub k_new: State,
    /// Scaled RMS error; `<= 1` means accept.
    pub err: f64,
    pub dense: Dense,
}

/// RMS norm with the three fiber slots summed in an order-free way.
pub(crate) fn rms(q: &State) -> f64 {
    ((sum3(q[0] * q[0], q[1] * q[1], q[2] * q[2]) + q[3] * q[3]) / 4.0).sqrt()
}

pub(crate) struct Dopri5<F> {
    f: F,
    rtol: f64,
    atol: f64,
    facold: f64,
}

const SAFE: f64 = 0.9;
const BETA: f64 = 0.04;
const FAC_MIN: f64 = 0.2;
const FAC_MAX: f64 = 10.0;

impl<F: Fn(&State) -> State> Dopri5<F> {
    pub fn new(f: F, rtol: f64, atol: f64) -> Self {
        Dopri5 {
            f,
            rtol,
            atol,
            facold: 1e-4,
        }
    }

    pub fn rhs(&self, y: &State) -> State {
        (self.f)(y)
    }

    fn scaled(&self, y0: &State, y1: &State, v: &State) -> State {
        let mut q = [0.0; 4];
        for i in 0..4 {
            let sc = self.atol + self.rtol * y0[i].abs().max(y1[i].abs());
            q[i] = v[i] / sc;
        }
        q
    }

    /// Starting step from the Hairer-Norsett-Wanner heuristic.
    pub fn initial_step(&self, y0: &State, f0: &State, hmax: f64) -> f64 {
        let d0 = rms(&self.scaled(y0, y0, y0));
        let d1 = rms(&self.scaled(y0, y0, f0));
        let h0 = if d0 < 1e-5 || d1 < 1e-5 { 1e-6 } else { 0.01 * d0 / d1 };
        let h0 = h0.min(hmax);
        let mut y1 = [0.0; 4];
        for i in 0..4 {
            y1[i] = y0[i] + h0 * f0[i];
        }
        let f1 = self.rhs(&y1);
        let mut df = [0.0; 4];
        for i in 0..4 {
            df[i] = f1[i] - f0[i];
        }
        let d2 = rms(&self.scaled(y0, y0, &df)) / h0;
        let dm = d1.max(d2);
        let h1 = if dm <= 1e-15 {
            (h0 * 1e-3).max(1e-6)
        } else {
            (0.01 / dm).powf(0.2)
        };
        (100.0 * h0).min(h1).min(hmax)
    }

    pub fn step(&self, y: &State, k1: &State, h: f64) -> StepResult {
        let f = &self.f;
        let mut t = [0.0; 4];

        for i in 0..4 {
            t[i] = y[i] + h * (A21 * k1[i]);
        }
        let k2 = f(&t);
        for i in 0..4 {
            t[i] = y[i] + h * (A31 * k1[i] + A32 * k2[i]);
        }
        let k3 = f(&t);
        for i in 0..4 {
            t[i] = y[i] + h * (A41 * k1[i] + A42 * k2[i] + A43 * k3[i]);
        }
        let k4 = f(&t);
        for i in 0..4 {
            t[i] = y[i] + h * (A51 * k1[i] + A52 * k2[i] + A53 * k3[i] + A54 * k4[i]);
        }
        let k5 = f(&t);
        for i in 0..4 {
            t[i] = y[i] + h * (A61 * k1[i] + A62 * k2[i] + A63 * k3[i] + A64 * k4[i] + A65 * k5[i]);
        }
        let k6 = f(&t);
        let mut y_new = [0.0; 4];
        for i in 0..4 {
            y_new[i] = y[i] + h * (A71 * k1[i] + A73 * k3[i] + A74 * k4[i] + A75 * k5[i] + A76 * k6[i]);
        }
        let k7 = f(&y_new);

        let mut e = [0.0; 4];
        for i in 0..4 {
            e[i] = h * (E1 * k1[i] + E3 * k3[i] + E4 * k4[i] + E5 * k5[i] + E6 * k6[i] + E7 * k7[i]);
        }
        let err = rms(&self.scaled(y, &y_new, &e));

        let mut rcont = [[0.0; 4]; 5];
        for i in 0..4 {
            let dy = y_new[i] - y[i];
            let bspl = h * k1[i] - dy;
            rcont[0][i] = y[i];
            rcont[1][i] = dy;
            rcont[2][i] = bspl;
            rcont[3][i] = dy - h * k7[i] - bspl;
            rcont[4][i] =
                h * (D1 * k1[i] + D3 * k3[i] + D4 * k4[i] + D5 * k5[i] + D6 * k6[i] + D7 * k7[i]);
        }

        StepResult {
            y_new,
            k_new: k7,
            err: if err.is_finite() && y_new.iter().all(|v| v.is_finite()) {
                err
            } else {
                f64::INFINITY
            },
            dense: Dense { rcont },
        }
    }

    /// Next step size after an accepted (`err <= 1`) or rejected step.
    pub fn next_step(&mut self, h: f64, err: f64, last_rejected: bool) -> f64 {
        if !err.is_finite() {
            return h * FAC_MIN;
        }
        let expo1 = 0.2 - BETA * 0.75;
        let fac11 = err.powf(expo1);
        if err <= 1.0 {
            let mut fac = fac11 / self.facold.powf(BETA);
            fac = (fac / SAFE).clamp(1.0 / FAC_MAX, 1.0 / FAC_MIN);
            self.facold = err.max(1e-4);
            let hnew = h / fac;
            if last_rejected {
                hnew.min(h)
            } else {
                hnew
            }
        } else {
            h / (fac11 / SAFE).min(1.0 / FAC_MIN)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exponential_decay_is_accurate() {
        let solver = Dopri5::new(|y: &State| [-y[0], -2.0 * y[1], 0.5 * y[2], 0.0], 1e-10, 1e-12);
        let mut y = [1.0, 1.0, 1.0, 3.0];
        let mut k = solver.rhs(&y);
        let mut solver = solver;
        let mut t = 0.0;
        let mut h = solver.initial_step(&y, &k, 1.0);
        let mut rejected = false;
        while t < 1.0 {
            let hh = h.min(1.0 - t);
            let res = solver.step(&y, &k, hh);
            if res.err <= 1.0 {
                let mid = res.dense.eval(0.5);
                assert!((mid[0] - (-(t + 0.5 * hh)).exp()).abs() < 1e-9);
                t += hh;
                y = res.y_new;
                k = res.k_new;
                h = solver.next_step(hh, res.err, rejected);
                rejected = false;
            } else {
                h = solver.next_step(hh, res.err, rejected);
                rejected = true;
            }
        }
        assert!((y[0] - (-1f64).exp()).abs() < 1e-10);
        assert!((y[1] - (-2f64).exp()).abs() < 1e-10);
        assert!((y[2] - 0.5f64.exp()).abs() < 1e-10);
        assert_eq!(y[3], 3.0);
    }

    #[test]
    fn dense_output_hits_endpoints() {
        let solver = Dopri5::new(|y: &State| [y[1], -y[0], 1.0, 0.0], 1e-8, 1e-10);
        let y = [0.0, 1.0, 0.0, 0.0];
        let k = solver.rhs(&y);
        let res = solver.step(&y, &k, 0.1);
        assert_eq!(res.dense.eval(0.0), y);
        for i in 0..4 {
            assert!((res.dense.eval(1.0)[i] - res.y_new[i]).abs() < 1e-15);
        }
    }
}

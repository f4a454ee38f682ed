//! Fixed-step RK4 flows with step doubling and variational equations.

use crate::error::{Error, Result};

use super::{DomainBox, VectorField};

#[derive(Debug, Clone)]
pub struct FlowOptions {
    /// Target step size; the step count starts at `ceil(|t| / step)`.
    pub step: f64,
    /// Accepted Richardson error estimate (max norm).
    pub tol: f64,
    /// Maximum number of step-count doublings before giving up.
    pub max_doublings: u32,
    pub domain: Option<DomainBox>,
}

impl Default for FlowOptions {
    fn default() -> Self {
        FlowOptions { step: 1.0 / 256.0, tol: 1e-11, max_doublings: 8, domain: None }
    }
}

#[derive(Debug, Clone)]
pub struct FlowResult {
    pub point: Vec<f64>,
    /// `∂ point / ∂ x0`, row-major `n × n`; empty when not requested.
    pub jacobian: Vec<Vec<f64>>,
    pub error_estimate: f64,
    pub steps: usize,
}

type Rhs<'a> = dyn Fn(&[f64]) -> Vec<f64> + 'a;

fn rk4_run(f: &Rhs, n_phys: usize, y0: &[f64], t: f64, steps: usize, domain: Option<&DomainBox>) -> Result<Vec<f64>> {
    let h = t / steps as f64;
    let mut y = y0.to_vec();
    let dim = y.len();
    let mut tmp = vec![0.0; dim];
    for s in 0..steps {
        let k1 = f(&y);
        for i in 0..dim {
            tmp[i] = y[i] + 0.5 * h * k1[i];
        }
        let k2 = f(&tmp);
        for i in 0..dim {
            tmp[i] = y[i] + 0.5 * h * k2[i];
        }
        let k3 = f(&tmp);
        for i in 0..dim {
            tmp[i] = y[i] + h * k3[i];
        }
        let k4 = f(&tmp);
        let mut next = y.clone();
        for i in 0..dim {
            next[i] += h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
        }
        let bad = next.iter().any(|v| !v.is_finite());
        let outside = domain.is_some_and(|d| !d.contains(&next[..n_phys]));
        if bad || outside {
            return Err(Error::Flow {
                message: if bad { "non-finite state".into() } else { "left the domain box".into() },
                time: h * s as f64,
                last_state: y[..n_phys].to_vec(),
            });
        }
        y = next;
    }
    Ok(y)
}

fn integrate(f: &Rhs, n_phys: usize, y0: &[f64], t: f64, opts: &FlowOptions) -> Result<(Vec<f64>, f64, usize)> {
    if t == 0.0 {
        return Ok((y0.to_vec(), 0.0, 0));
    }
    if let Some(d) = &opts.domain {
        d.check(&y0[..n_phys])?;
    }
    let mut steps = ((t.abs() / opts.step).ceil() as usize).max(1);
    let mut coarse = rk4_run(f, n_phys, y0, t, steps, opts.domain.as_ref())?;
    let mut last_err = f64::INFINITY;
    for _ in 0..=opts.max_doublings {
        let fine = rk4_run(f, n_phys, y0, t, 2 * steps, opts.domain.as_ref())?;
        let err = coarse.iter().zip(&fine).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max) / 15.0;
        if err <= opts.tol {
            return Ok((fine, err, 2 * steps));
        }
        last_err = err;
        coarse = fine;
        steps *= 2;
    }
    Err(Error::Flow {
        message: format!("step control failed, error estimate {last_err:.3e} above {:.1e}", opts.tol),
        time: t,
        last_state: coarse[..n_phys].to_vec(),
    })
}

/// Time-`t` flow of `X` from `x0`.
pub fn flow(x: &VectorField, x0: &[f64], t: f64, opts: &FlowOptions) -> Result<FlowResult> {
    let f = |y: &[f64]| x.value(y);
    let (point, error_estimate, steps) = integrate(&f, x0.len(), x0, t, opts)?;
    Ok(FlowResult { point, jacobian: Vec::new(), error_estimate, steps })
}

/// Flow together with its spatial Jacobian via the variational equation
/// `J' = DX(x) J`.
pub fn flow_with_jacobian(x: &VectorField, x0: &[f64], t: f64, opts: &FlowOptions) -> Result<FlowResult> {
    let n = x0.len();
    let f = |y: &[f64]| {
        let (v, dx) = x.jacobian(&y[..n]);
        let mut out = v;
        out.reserve(n * n);
        for i in 0..n {
            for j in 0..n {
                let mut s = 0.0;
                for k in 0..n {
                    s += dx[i][k] * y[n + k * n + j];
                }
                out.push(s);
            }
        }
        out
    };
    let mut y0 = x0.to_vec();
    for i in 0..n {
        for j in 0..n {
            y0.push(if i == j { 1.0 } else { 0.0 });
        }
    }
    let (y, error_estimate, steps) = integrate(&f, n, &y0, t, opts)?;
    let jacobian = (0..n).map(|i| y[n + i * n..n + (i + 1) * n].to_vec()).collect();
    Ok(FlowResult { point: y[..n].to_vec(), jacobian, error_estimate, steps })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::poly::Poly;

    fn field(c: &[&str]) -> VectorField {
        VectorField::from_polys(c.iter().map(|s| Poly::parse(s).unwrap()).collect())
    }

    #[test]
    fn constant_field() {
        let r = flow(&field(&["1", "0"]), &[0.0, 0.0], 1.0, &FlowOptions::default()).unwrap();
        assert!((r.point[0] - 1.0).abs() < 1e-14 && r.point[1].abs() < 1e-14);
    }

    #[test]
    fn exponential() {
        let r = flow_with_jacobian(&field(&["x1"]), &[1.0], 1.0, &FlowOptions::default()).unwrap();
        assert!((r.point[0] - std::f64::consts::E).abs() < 1e-8);
        assert!((r.jacobian[0][0] - std::f64::consts::E).abs() < 1e-8);
    }

    #[test]
    fn zero_time_is_identity() {
        let r = flow(&field(&["x1^2"]), &[0.3], 0.0, &FlowOptions::default()).unwrap();
        assert_eq!(r.point, vec![0.3]);
    }

    #[test]
    fn leaving_domain_reports_last_state() {
        let opts = FlowOptions { domain: Some(DomainBox::cube(1, -1.0, 1.0)), ..FlowOptions::default() };
        match flow(&field(&["1"]), &[0.0], 2.0, &opts) {
            Err(Error::Flow { last_state, .. }) => assert!(last_state[0] < 1.0 && last_state[0] > 0.9),
            other => panic!("unexpected {other:?}"),
        }
    }
}

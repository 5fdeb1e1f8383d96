//! Five-stage fourth-order low-storage Runge-Kutta integration and timestep estimates.

use crate::error::{EsdgError, Result};
use crate::euler::Conserved;
use crate::operators_1d::NodeFamily;

/// Stage coefficients of the standard five-stage fourth-order 2N-storage Runge-Kutta
/// scheme (the widely used "solution 3" coefficient set).
pub const RK45_A: [f64; 5] = [
    0.0,
    -567301805773.0 / 1357537059087.0,
    -2404267990393.0 / 2016746695238.0,
    -3550918686646.0 / 2091501179385.0,
    -1275806237668.0 / 842570457699.0,
];
pub const RK45_B: [f64; 5] = [
    1432997174477.0 / 9575080441755.0,
    5161836677717.0 / 13612068292357.0,
    1720146321549.0 / 2090206949498.0,
    3134564353537.0 / 4481467310338.0,
    2277821191437.0 / 14882151754819.0,
];
pub const RK45_C: [f64; 5] = [
    0.0,
    1432997174477.0 / 9575080441755.0,
    2526269341429.0 / 6820363183990.0,
    2006345519317.0 / 3224310063776.0,
    2802321613138.0 / 2924317926251.0,
];

/// Vector-space operations needed by the integrator.
pub trait StateVector: Copy + Send + Sync {
    fn zero() -> Self;
    fn axpy(&mut self, s: f64, x: &Self);
    fn scale(&mut self, s: f64);
    fn is_finite(&self) -> bool;
}

impl StateVector for f64 {
    fn zero() -> Self {
        0.0
    }
    fn axpy(&mut self, s: f64, x: &Self) {
        *self += s * x;
    }
    fn scale(&mut self, s: f64) {
        *self *= s;
    }
    fn is_finite(&self) -> bool {
        f64::is_finite(*self)
    }
}

impl<const D: usize> StateVector for Conserved<D> {
    fn zero() -> Self {
        Conserved::zero()
    }
    fn axpy(&mut self, s: f64, x: &Self) {
        Conserved::axpy(self, s, x);
    }
    fn scale(&mut self, s: f64) {
        *self = *self * s;
    }
    fn is_finite(&self) -> bool {
        Conserved::is_finite(self)
    }
}

/// Trace-inequality constant of the timestep estimate.
pub fn trace_constant(dim: usize, degree: usize, family: NodeFamily) -> f64 {
    let (d, n) = (dim as f64, degree as f64);
    match family {
        NodeFamily::Gll => d * n * (n + 1.0) / 2.0,
        NodeFamily::Gauss => d * (n + 1.0) * (n + 2.0) / 2.0,
    }
}

/// `dt = cfl h / (a C_N)`.
pub fn estimate_dt(cfl: f64, h: f64, wave_speed: f64, trace_const: f64) -> Result<f64> {
    if !(wave_speed > 0.0) || !wave_speed.is_finite() {
        return Err(EsdgError::Config(format!("wave speed estimate must be positive, got {wave_speed}")));
    }
    let dt = cfl * h / (wave_speed * trace_const);
    if !(dt > 0.0) || !dt.is_finite() {
        return Err(EsdgError::Config(format!("nonpositive timestep {dt}")));
    }
    Ok(dt)
}

/// Summary of a completed integration.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IntegrationSummary {
    pub steps: usize,
    pub time: f64,
    /// Sum of all step sizes taken.
    pub total_dt: f64,
}

/// Low-storage RK45 driver with output times hit exactly.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Integrator {
    pub t_start: f64,
    pub t_final: f64,
    /// Callback cadence; steps are clipped to land on each output time.
    pub output_interval: Option<f64>,
}

impl Integrator {
    pub fn new(t_start: f64, t_final: f64) -> Self {
        Self { t_start, t_final, output_interval: None }
    }

    pub fn with_output_interval(mut self, interval: f64) -> Self {
        self.output_interval = Some(interval);
        self
    }

    /// Integrates `du/dt = rhs(t, u)` in place. `dt_of` proposes a step size from the
    /// current state; `on_output(t, u)` runs at the start, at every output time and at
    /// the final time.
    pub fn run<T, R, S, O>(&self, u: &mut [T], mut rhs: R, mut dt_of: S, mut on_output: O) -> Result<IntegrationSummary>
    where
        T: StateVector,
        R: FnMut(f64, &[T], &mut [T]) -> Result<()>,
        S: FnMut(&[T]) -> Result<f64>,
        O: FnMut(f64, &[T]) -> Result<()>,
    {
        if !(self.t_final >= self.t_start) {
            return Err(EsdgError::Config("final time precedes start time".into()));
        }
        if let Some(iv) = self.output_interval {
            if !(iv > 0.0) {
                return Err(EsdgError::Config(format!("output interval must be positive, got {iv}")));
            }
        }
        let mut k = vec![T::zero(); u.len()];
        let mut f = vec![T::zero(); u.len()];
        let mut t = self.t_start;
        let mut steps = 0;
        let mut total_dt = 0.0;
        let mut outputs = 0usize;
        on_output(t, u)?;
        let tol = 1e-13 * self.t_final.abs().max(1.0);
        while self.t_final - t > tol {
            let next_output = match self.output_interval {
                Some(iv) => (self.t_start + (outputs + 1) as f64 * iv).min(self.t_final),
                None => self.t_final,
            };
            let mut dt = dt_of(u)?;
            let mut hits_output = false;
            if t + dt >= next_output - tol {
                dt = next_output - t;
                hits_output = true;
            }
            for s in 0..5 {
                rhs(t + RK45_C[s] * dt, u, &mut f)?;
                for (ki, fi) in k.iter_mut().zip(&f) {
                    ki.scale(RK45_A[s]);
                    ki.axpy(dt, fi);
                }
                for (ui, ki) in u.iter_mut().zip(&k) {
                    ui.axpy(RK45_B[s], ki);
                }
            }
            steps += 1;
            total_dt += dt;
            t = if hits_output { next_output } else { t + dt };
            if !u.iter().all(StateVector::is_finite) {
                return Err(EsdgError::NonFinite { time: t, step: steps });
            }
            if hits_output {
                outputs += 1;
                on_output(t, u)?;
            }
        }
        Ok(IntegrationSummary { steps, time: t, total_dt })
    }
}

/// Observed convergence rates `log2(e_k / e_{k+1})` for successive halvings.
pub fn observed_orders(errors: &[f64]) -> Vec<f64> {
    errors.windows(2).map(|w| (w[0] / w[1]).log2()).collect()
}

/// Errors of the scalar decay problem `du/dt = -u`, `u(0) = 1` at `t = 1` for `dt` and
/// successive halvings.
pub fn scalar_decay_errors(dt0: f64, halvings: usize) -> Result<Vec<f64>> {
    (0..=halvings)
        .map(|h| {
            let dt = dt0 / f64::powi(2.0, h as i32);
            let mut u = [1.0];
            Integrator::new(0.0, 1.0).run(
                &mut u,
                |_, x, out| {
                    out[0] = -x[0];
                    Ok(())
                },
                |_| Ok(dt),
                |_, _| Ok(()),
            )?;
            Ok((u[0] - (-1.0f64).exp()).abs())
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn coefficients_are_consistent() {
        // first-order condition: the weights of the equivalent Butcher tableau sum to one
        let mut ks = [0.0; 5];
        let mut acc = 0.0;
        // for u' = 1 the increment per step must equal dt
        for s in 0..5 {
            let prev = if s == 0 { 0.0 } else { ks[s - 1] };
            ks[s] = RK45_A[s] * prev + 1.0;
            acc += RK45_B[s] * ks[s];
        }
        assert!((acc - 1.0).abs() < 1e-14);
        // stage times: c_{s+1} = c_s + b_s * k_s for u' = 1; the published rational
        // values satisfy this to about 5e-8
        let mut c = 0.0;
        for s in 0..4 {
            c += RK45_B[s] * ks[s];
            assert!((c - RK45_C[s + 1]).abs() < 1e-7);
        }
    }

    #[test]
    fn trace_constants() {
        assert_eq!(trace_constant(3, 2, NodeFamily::Gauss), 18.0);
        assert_eq!(trace_constant(3, 2, NodeFamily::Gll), 9.0);
        assert_eq!(trace_constant(2, 2, NodeFamily::Gauss), 12.0);
    }

    #[test]
    fn dt_estimate_rejects_bad_wave_speed() {
        assert!(estimate_dt(0.5, 1.0, 0.0, 18.0).is_err());
        assert!(estimate_dt(0.5, 1.0, f64::NAN, 18.0).is_err());
        assert!((estimate_dt(0.5, 1.25, 2.0, 12.0).unwrap() - 0.5 * 1.25 / 24.0).abs() < 1e-16);
    }

    #[test]
    fn fourth_order_on_scalar_decay() {
        let errors = scalar_decay_errors(0.1, 3).unwrap();
        assert!(errors[0] < 1e-5);
        for p in observed_orders(&errors) {
            assert!((p - 4.0).abs() < 0.1, "{p}");
        }
    }

    #[test]
    fn zero_rhs_leaves_state_bit_identical() {
        let mut u = [0.1, -3.7, 1e300];
        let orig = u;
        Integrator::new(0.0, 1.0)
            .run(
                &mut u,
                |_, _, out| {
                    out.iter_mut().for_each(|x| *x = 0.0);
                    Ok(())
                },
                |_| Ok(0.013),
                |_, x| {
                    assert_eq!(x, &orig);
                    Ok(())
                },
            )
            .unwrap();
        assert_eq!(u, orig);
    }

    #[test]
    fn step_clipping_sums_to_final_time() {
        let mut u = [1.0];
        let mut times = Vec::new();
        let s = Integrator::new(0.0, 1.0)
            .with_output_interval(0.3)
            .run(
                &mut u,
                |_, x, out| {
                    out[0] = -x[0];
                    Ok(())
                },
                |_| Ok(0.07),
                |t, _| {
                    times.push(t);
                    Ok(())
                },
            )
            .unwrap();
        assert!((s.total_dt - 1.0).abs() < 1e-12);
        assert_eq!(s.time, 1.0);
        assert_eq!(times.len(), 5);
        assert!((times[2] - 0.6).abs() < 1e-15);
    }

    #[test]
    fn skew_system_energy_drift_is_fourth_order() {
        // u' = [[0, 1], [-1, 0]] u preserves |u|^2
        let drift = |dt: f64| {
            let mut u = [1.0, 0.0];
            Integrator::new(0.0, 1.0)
                .run(
                    &mut u,
                    |_, x, out| {
                        out[0] = x[1];
                        out[1] = -x[0];
                        Ok(())
                    },
                    |_| Ok(dt),
                    |_, _| Ok(()),
                )
                .unwrap();
            (u[0] * u[0] + u[1] * u[1] - 1.0).abs()
        };
        let rate = (drift(0.1) / drift(0.05)).log2();
        assert!(rate > 3.8, "{rate}");
    }

    #[test]
    fn non_finite_state_aborts() {
        let mut u = [1.0];
        let err = Integrator::new(0.0, 1.0)
            .run(
                &mut u,
                |_, x, out| {
                    out[0] = x[0] * 1e308;
                    Ok(())
                },
                |_| Ok(0.5),
                |_, _| Ok(()),
            )
            .unwrap_err();
        assert!(matches!(err, EsdgError::NonFinite { step: 1, .. }));
    }
}

//! Compressible Euler state algebra, entropy variables, two-point fluxes and interface dissipation.

use std::ops::{Add, AddAssign, Mul, Neg, Sub, SubAssign};

use crate::error::{EsdgError, Result};

pub const DEFAULT_GAMMA: f64 = 1.4;

macro_rules! impl_linear {
    ($ty:ident, $a:ident, $b:ident, $c:ident) => {
        impl<const D: usize> $ty<D> {
            pub fn zero() -> Self {
                Self { $a: 0.0, $b: [0.0; D], $c: 0.0 }
            }

            /// Number of components, `D + 2`.
            pub const LEN: usize = D + 2;

            pub fn component(&self, k: usize) -> f64 {
                if k == 0 {
                    self.$a
                } else if k <= D {
                    self.$b[k - 1]
                } else {
                    self.$c
                }
            }

            pub fn component_mut(&mut self, k: usize) -> &mut f64 {
                if k == 0 {
                    &mut self.$a
                } else if k <= D {
                    &mut self.$b[k - 1]
                } else {
                    &mut self.$c
                }
            }

            pub fn from_fn<F: FnMut(usize) -> f64>(mut f: F) -> Self {
                let mut out = Self::zero();
                for k in 0..D + 2 {
                    *out.component_mut(k) = f(k);
                }
                out
            }

            pub fn is_finite(&self) -> bool {
                (0..D + 2).all(|k| self.component(k).is_finite())
            }

            pub fn max_abs(&self) -> f64 {
                (0..D + 2).fold(0.0, |m, k| m.max(self.component(k).abs()))
            }

            /// `self += s * other`.
            #[inline]
            pub fn axpy(&mut self, s: f64, other: &Self) {
                self.$a += s * other.$a;
                for k in 0..D {
                    self.$b[k] += s * other.$b[k];
                }
                self.$c += s * other.$c;
            }
        }

        impl<const D: usize> Add for $ty<D> {
            type Output = Self;
            #[inline]
            fn add(mut self, rhs: Self) -> Self {
                self += rhs;
                self
            }
        }

        impl<const D: usize> Sub for $ty<D> {
            type Output = Self;
            #[inline]
            fn sub(mut self, rhs: Self) -> Self {
                self -= rhs;
                self
            }
        }

        impl<const D: usize> AddAssign for $ty<D> {
            #[inline]
            fn add_assign(&mut self, rhs: Self) {
                self.axpy(1.0, &rhs);
            }
        }

        impl<const D: usize> SubAssign for $ty<D> {
            #[inline]
            fn sub_assign(&mut self, rhs: Self) {
                self.axpy(-1.0, &rhs);
            }
        }

        impl<const D: usize> Mul<f64> for $ty<D> {
            type Output = Self;
            #[inline]
            fn mul(mut self, s: f64) -> Self {
                self.$a *= s;
                for k in 0..D {
                    self.$b[k] *= s;
                }
                self.$c *= s;
                self
            }
        }

        impl<const D: usize> Neg for $ty<D> {
            type Output = Self;
            fn neg(self) -> Self {
                self * -1.0
            }
        }

        impl<const D: usize> Default for $ty<D> {
            fn default() -> Self {
                Self::zero()
            }
        }
    };
}

/// Conservative variables `(rho, rho u, E)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Conserved<const D: usize> {
    pub rho: f64,
    pub mom: [f64; D],
    pub energy: f64,
}

/// Entropy variables `v = dS/du`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EntropyVars<const D: usize> {
    pub mass: f64,
    pub mom: [f64; D],
    pub energy: f64,
}

impl_linear!(Conserved, rho, mom, energy);
impl_linear!(EntropyVars, mass, mom, energy);

impl<const D: usize> EntropyVars<D> {
    pub fn dot(&self, u: &Conserved<D>) -> f64 {
        self.mass * u.rho + (0..D).map(|k| self.mom[k] * u.mom[k]).sum::<f64>() + self.energy * u.energy
    }
}

/// Primitive variables `(rho, u, p)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Primitive<const D: usize> {
    pub rho: f64,
    pub vel: [f64; D],
    pub p: f64,
}

/// Quantities reused by every two-point flux evaluation involving a node.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FluxState<const D: usize> {
    pub rho: f64,
    pub vel: [f64; D],
    pub p: f64,
    /// `rho / (2 p)`.
    pub beta: f64,
    pub log_rho: f64,
    pub log_beta: f64,
    /// `|u|^2`.
    pub vel_sq: f64,
}

#[inline]
fn dot<const D: usize>(a: &[f64; D], b: &[f64; D]) -> f64 {
    (0..D).map(|k| a[k] * b[k]).sum()
}

/// Logarithmic mean from values and their logarithms.
#[inline]
pub fn log_mean_with_logs(a: f64, b: f64, log_a: f64, log_b: f64) -> f64 {
    // canonical argument order keeps the result bitwise symmetric
    let (a, b, log_a, log_b) = if a <= b { (a, b, log_a, log_b) } else { (b, a, log_b, log_a) };
    let zeta = a / b;
    let dz = zeta - 1.0;
    if dz * dz < 1e-4 {
        let f = dz / (zeta + 1.0);
        let u = f * f;
        let series = 1.0 + u / 3.0 + u * u / 5.0 + u * u * u / 7.0;
        0.5 * (a + b) / series
    } else {
        (a - b) / (log_a - log_b)
    }
}

/// Logarithmic mean `(a - b) / (log a - log b)` with a series branch near `a = b`.
pub fn log_mean(a: f64, b: f64) -> Result<f64> {
    if !(a > 0.0 && b > 0.0) {
        return Err(EsdgError::LogMean(a, b));
    }
    Ok(log_mean_with_logs(a, b, a.ln(), b.ln()))
}

/// Ideal gas with constant ratio of specific heats.
/// Two-point flux identity residuals.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FluxResiduals {
    /// `|f(a, b) - f(b, a)|_inf`.
    pub symmetry: f64,
    /// `|f(a, a) - f(a)|_inf / max(1, |f(a)|_inf)`.
    pub consistency: f64,
    /// `|(v_a - v_b)^T f(a, b) - (psi_a - psi_b)|`.
    pub shuffle: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Gas {
    pub gamma: f64,
}

impl Default for Gas {
    fn default() -> Self {
        Self { gamma: DEFAULT_GAMMA }
    }
}

impl Gas {
    pub fn new(gamma: f64) -> Self {
        Self { gamma }
    }

    #[inline]
    pub fn pressure<const D: usize>(&self, u: &Conserved<D>) -> f64 {
        let m2 = dot(&u.mom, &u.mom);
        (self.gamma - 1.0) * (u.energy - 0.5 * m2 / u.rho)
    }

    pub fn is_admissible<const D: usize>(&self, u: &Conserved<D>) -> bool {
        u.rho > 0.0 && self.pressure(u) > 0.0 && u.is_finite()
    }

    pub fn primitive<const D: usize>(&self, u: &Conserved<D>) -> Result<Primitive<D>> {
        let p = self.pressure(u);
        if !(u.rho > 0.0 && p > 0.0) || !u.is_finite() {
            return Err(EsdgError::NonAdmissible { rho: u.rho, p });
        }
        let mut vel = [0.0; D];
        for k in 0..D {
            vel[k] = u.mom[k] / u.rho;
        }
        Ok(Primitive { rho: u.rho, vel, p })
    }

    pub fn conserved<const D: usize>(&self, w: &Primitive<D>) -> Conserved<D> {
        let mut mom = [0.0; D];
        for k in 0..D {
            mom[k] = w.rho * w.vel[k];
        }
        let energy = w.p / (self.gamma - 1.0) + 0.5 * w.rho * dot(&w.vel, &w.vel);
        Conserved { rho: w.rho, mom, energy }
    }

    pub fn sound_speed(&self, rho: f64, p: f64) -> f64 {
        (self.gamma * p / rho).sqrt()
    }

    /// `|u| + c`.
    pub fn max_wave_speed<const D: usize>(&self, u: &Conserved<D>) -> Result<f64> {
        let w = self.primitive(u)?;
        Ok(dot(&w.vel, &w.vel).sqrt() + self.sound_speed(w.rho, w.p))
    }

    /// Physical entropy `s = log(p / rho^gamma)`.
    pub fn physical_entropy<const D: usize>(&self, u: &Conserved<D>) -> Result<f64> {
        let w = self.primitive(u)?;
        Ok(w.p.ln() - self.gamma * w.rho.ln())
    }

    /// Mathematical entropy `S = -rho s / (gamma - 1)`.
    pub fn entropy<const D: usize>(&self, u: &Conserved<D>) -> Result<f64> {
        Ok(-u.rho * self.physical_entropy(u)? / (self.gamma - 1.0))
    }

    pub fn entropy_vars<const D: usize>(&self, u: &Conserved<D>) -> Result<EntropyVars<D>> {
        let w = self.primitive(u)?;
        let g = self.gamma;
        let s = w.p.ln() - g * w.rho.ln();
        let b = w.rho / w.p;
        let mut mom = [0.0; D];
        for k in 0..D {
            mom[k] = b * w.vel[k];
        }
        Ok(EntropyVars {
            mass: (g - s) / (g - 1.0) - 0.5 * b * dot(&w.vel, &w.vel),
            mom,
            energy: -b,
        })
    }

    pub fn conserved_from_entropy<const D: usize>(&self, v: &EntropyVars<D>) -> Result<Conserved<D>> {
        if !(v.energy < 0.0) || !v.is_finite() {
            return Err(EsdgError::EntropyVars(v.energy));
        }
        let g = self.gamma;
        // p / rho
        let theta = -1.0 / v.energy;
        let vm2 = dot(&v.mom, &v.mom);
        let s = g - (g - 1.0) * (v.mass - 0.5 * vm2 / v.energy);
        let rho = ((theta.ln() - s) / (g - 1.0)).exp();
        let p = rho * theta;
        let mut vel = [0.0; D];
        for k in 0..D {
            vel[k] = -v.mom[k] / v.energy;
        }
        let u = self.conserved(&Primitive { rho, vel, p });
        if !(rho > 0.0 && p > 0.0) || !u.is_finite() {
            return Err(EsdgError::NonAdmissible { rho, p });
        }
        Ok(u)
    }

    /// Entropy variables from precomputed flux data, reusing its logarithms.
    #[inline]
    pub fn entropy_vars_from_state<const D: usize>(&self, fs: &FluxState<D>) -> EntropyVars<D> {
        let g = self.gamma;
        // ln p = ln rho - ln(2 beta)
        let s = (1.0 - g) * fs.log_rho - std::f64::consts::LN_2 - fs.log_beta;
        let b = 2.0 * fs.beta;
        EntropyVars {
            mass: (g - s) / (g - 1.0) - 0.5 * b * fs.vel_sq,
            mom: std::array::from_fn(|k| b * fs.vel[k]),
            energy: -b,
        }
    }

    /// Conservative variables and flux data from entropy variables with one logarithm
    /// and one exponential.
    #[inline]
    pub fn states_from_entropy<const D: usize>(&self, v: &EntropyVars<D>) -> Result<(Conserved<D>, FluxState<D>)> {
        if !(v.energy < 0.0) || !v.is_finite() {
            return Err(EsdgError::EntropyVars(v.energy));
        }
        let g = self.gamma;
        let beta = -0.5 * v.energy;
        let log_beta = beta.ln();
        // theta = p / rho = 1 / (2 beta)
        let log_theta = -(log_beta + std::f64::consts::LN_2);
        let vm2 = dot(&v.mom, &v.mom);
        let s = g - (g - 1.0) * (v.mass - 0.5 * vm2 / v.energy);
        let log_rho = (log_theta - s) / (g - 1.0);
        let rho = log_rho.exp();
        let p = rho * (0.5 / beta);
        let vel: [f64; D] = std::array::from_fn(|k| -v.mom[k] / v.energy);
        let w = Primitive { rho, vel, p };
        let u = self.conserved(&w);
        if !(rho > 0.0 && p > 0.0) || !u.is_finite() {
            return Err(EsdgError::NonAdmissible { rho, p });
        }
        let fs = FluxState { rho, vel, p, beta, log_rho, log_beta, vel_sq: dot(&vel, &vel) };
        Ok((u, fs))
    }

    /// Physical flux contracted with `n`: `sum_i n_i f_i(u)`.
    pub fn flux_n<const D: usize>(&self, u: &Conserved<D>, n: &[f64; D]) -> Conserved<D> {
        let rho = u.rho;
        let mut vel = [0.0; D];
        for k in 0..D {
            vel[k] = u.mom[k] / rho;
        }
        let p = self.pressure(u);
        let un = dot(&vel, n);
        let mut mom = [0.0; D];
        for k in 0..D {
            mom[k] = u.mom[k] * un + p * n[k];
        }
        Conserved { rho: rho * un, mom, energy: (u.energy + p) * un }
    }

    pub fn flux<const D: usize>(&self, u: &Conserved<D>, dir: usize) -> Conserved<D> {
        self.flux_n(u, &unit::<D>(dir))
    }

    /// Entropy potential `psi_i = v^T f_i - u_i S` contracted with `n`.
    pub fn entropy_potential_n<const D: usize>(&self, u: &Conserved<D>, n: &[f64; D]) -> Result<f64> {
        let v = self.entropy_vars(u)?;
        let s = self.entropy(u)?;
        let un = dot(&u.mom, n) / u.rho;
        Ok(v.dot(&self.flux_n(u, n)) - un * s)
    }

    pub fn entropy_potential<const D: usize>(&self, u: &Conserved<D>, dir: usize) -> Result<f64> {
        self.entropy_potential_n(u, &unit::<D>(dir))
    }

    pub fn flux_state<const D: usize>(&self, u: &Conserved<D>) -> Result<FluxState<D>> {
        let w = self.primitive(u)?;
        Ok(self.flux_state_from_primitive(&w))
    }

    #[inline]
    pub fn flux_state_from_primitive<const D: usize>(&self, w: &Primitive<D>) -> FluxState<D> {
        let beta = 0.5 * w.rho / w.p;
        FluxState {
            rho: w.rho,
            vel: w.vel,
            p: w.p,
            beta,
            log_rho: w.rho.ln(),
            log_beta: beta.ln(),
            vel_sq: dot(&w.vel, &w.vel),
        }
    }

    /// Entropy conservative flux contracted with `n`, from precomputed node data.
    #[inline]
    pub fn ec_flux_n<const D: usize>(&self, l: &FluxState<D>, r: &FluxState<D>, n: &[f64; D]) -> Conserved<D> {
        let rho_log = log_mean_with_logs(l.rho, r.rho, l.log_rho, r.log_rho);
        let beta_log = log_mean_with_logs(l.beta, r.beta, l.log_beta, r.log_beta);
        let rho_avg = 0.5 * (l.rho + r.rho);
        let beta_avg = 0.5 * (l.beta + r.beta);
        let mut u_avg = [0.0; D];
        let mut u_avg_sq = 0.0;
        for k in 0..D {
            u_avg[k] = 0.5 * (l.vel[k] + r.vel[k]);
            u_avg_sq += u_avg[k] * u_avg[k];
        }
        let p_avg = 0.5 * rho_avg / beta_avg;
        let u2_avg = 2.0 * u_avg_sq - 0.5 * (l.vel_sq + r.vel_sq);
        let e_avg = rho_log / (2.0 * (self.gamma - 1.0) * beta_log) + 0.5 * rho_log * u2_avg;
        let un = dot(&u_avg, n);
        let f_rho = rho_log * un;
        let mut mom = [0.0; D];
        for k in 0..D {
            mom[k] = f_rho * u_avg[k] + p_avg * n[k];
        }
        Conserved { rho: f_rho, mom, energy: (e_avg + p_avg) * un }
    }

    /// Kinetic energy preserving entropy conservative flux in reference direction `dir`.
    pub fn flux_ec<const D: usize>(&self, ul: &Conserved<D>, ur: &Conserved<D>, dir: usize) -> Result<Conserved<D>> {
        let l = self.flux_state(ul)?;
        let r = self.flux_state(ur)?;
        Ok(self.ec_flux_n(&l, &r, &unit::<D>(dir)))
    }

    /// Residuals of symmetry, consistency and the entropy shuffle condition of the entropy
    /// conservative flux for one pair of states in direction `dir`.
    pub fn flux_residuals<const D: usize>(&self, ul: &Conserved<D>, ur: &Conserved<D>, dir: usize) -> Result<FluxResiduals> {
        let f = self.flux_ec(ul, ur, dir)?;
        let g = self.flux_ec(ur, ul, dir)?;
        let exact = self.flux(ul, dir);
        let consistency = (self.flux_ec(ul, ul, dir)? - exact).max_abs() / exact.max_abs().max(1.0);
        let dv = self.entropy_vars(ul)? - self.entropy_vars(ur)?;
        let dpsi = self.entropy_potential(ul, dir)? - self.entropy_potential(ur, dir)?;
        Ok(FluxResiduals { symmetry: (f - g).max_abs(), consistency, shuffle: (dv.dot(&f) - dpsi).abs() })
    }

    /// Local Lax-Friedrichs penalty `lambda/2 (u_R - u_L)` for a unit normal.
    pub fn lax_friedrichs_penalty<const D: usize>(
        &self,
        ul: &Conserved<D>,
        ur: &Conserved<D>,
        l: &FluxState<D>,
        r: &FluxState<D>,
        n: &[f64; D],
    ) -> Conserved<D> {
        let lam_l = dot(&l.vel, n).abs() + self.sound_speed(l.rho, l.p);
        let lam_r = dot(&r.vel, n).abs() + self.sound_speed(r.rho, r.p);
        (*ur - *ul) * (0.5 * lam_l.max(lam_r))
    }

    pub fn dissipation_lax_friedrichs<const D: usize>(
        &self,
        ul: &Conserved<D>,
        ur: &Conserved<D>,
        n: &[f64; D],
    ) -> Result<Conserved<D>> {
        let l = self.flux_state(ul)?;
        let r = self.flux_state(ur)?;
        Ok(self.lax_friedrichs_penalty(ul, ur, &l, &r, n))
    }

    /// Matrix dissipation `1/2 R D R^T (v_R - v_L)` for a unit normal (two dimensions only).
    pub fn matrix_penalty<const D: usize>(
        &self,
        l: &FluxState<D>,
        r: &FluxState<D>,
        jump: &EntropyVars<D>,
        n: &[f64; D],
    ) -> Result<Conserved<D>> {
        if D != 2 {
            return Err(EsdgError::Unsupported(format!(
                "matrix dissipation is defined in two dimensions, not {D}"
            )));
        }
        let g = self.gamma;
        let rho_log = log_mean_with_logs(l.rho, r.rho, l.log_rho, r.log_rho);
        let beta_log = log_mean_with_logs(l.beta, r.beta, l.log_beta, r.log_beta);
        let rho_avg = 0.5 * (l.rho + r.rho);
        let beta_avg = 0.5 * (l.beta + r.beta);
        let u1 = 0.5 * (l.vel[0] + r.vel[0]);
        let u2 = 0.5 * (l.vel[1] + r.vel[1]);
        let (nx, ny) = (n[0], n[1]);
        let p_avg = 0.5 * rho_avg / beta_avg;
        let u2_avg = 2.0 * (u1 * u1 + u2 * u2) - 0.5 * (l.vel_sq + r.vel_sq);
        let un = u1 * nx + u2 * ny;
        let a = (g * p_avg / rho_log).sqrt();
        let h = g / (2.0 * (g - 1.0) * beta_log) + 0.5 * u2_avg;

        let rmat = [
            [1.0, 1.0, 0.0, 1.0],
            [u1 - a * nx, u1, ny, u1 + a * nx],
            [u2 - a * ny, u2, -nx, u2 + a * ny],
            [h - a * un, 0.5 * u2_avg, un * ny - u2 * nx, h + a * un],
        ];
        let dvals = [
            (un - a).abs() * rho_log / (2.0 * g),
            un.abs() * rho_log * (g - 1.0) / g,
            un.abs() * p_avg,
            (un + a).abs() * rho_log / (2.0 * g),
        ];
        let jv = [jump.mass, jump.mom[0], jump.mom[1], jump.energy];
        let mut coef = [0.0; 4];
        for c in 0..4 {
            coef[c] = 0.5 * dvals[c] * (0..4).map(|k| rmat[k][c] * jv[k]).sum::<f64>();
        }
        Ok(Conserved::from_fn(|k| (0..4).map(|c| rmat[k][c] * coef[c]).sum()))
    }

    pub fn dissipation_matrix<const D: usize>(
        &self,
        ul: &Conserved<D>,
        ur: &Conserved<D>,
        n: &[f64; D],
    ) -> Result<Conserved<D>> {
        let l = self.flux_state(ul)?;
        let r = self.flux_state(ur)?;
        let jump = self.entropy_vars(ur)? - self.entropy_vars(ul)?;
        self.matrix_penalty(&l, &r, &jump, n)
    }

    /// Reflects the velocity component along the unit normal `n`.
    pub fn wall_mirror_state<const D: usize>(&self, u: &Conserved<D>, n: &[f64; D]) -> Conserved<D> {
        let mn = dot(&u.mom, n);
        let mut out = *u;
        for k in 0..D {
            out.mom[k] -= 2.0 * mn * n[k];
        }
        out
    }
}

/// Unit vector along reference direction `dir`.
pub fn unit<const D: usize>(dir: usize) -> [f64; D] {
    let mut n = [0.0; D];
    n[dir] = 1.0;
    n
}

//! Analytic initial and exact states of the test problems.

use std::f64::consts::PI;

use crate::euler::{Conserved, Gas, Primitive};

/// Isentropic vortex advected in `x` with unit speed on a uniform background.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IsentropicVortex2d {
    pub gas: Gas,
    pub x0: f64,
    pub y0: f64,
    pub beta: f64,
}

impl Default for IsentropicVortex2d {
    fn default() -> Self {
        Self { gas: Gas::default(), x0: 5.0, y0: 0.0, beta: 5.0 }
    }
}

impl IsentropicVortex2d {
    /// Exact state at `x` and time `t` on an unbounded domain.
    pub fn primitive(&self, x: &[f64; 2], t: f64) -> Primitive<2> {
        let g = self.gas.gamma;
        let dx = x[0] - self.x0 - t;
        let dy = x[1] - self.y0;
        let e = (1.0 - dx * dx - dy * dy).exp();
        let be = self.beta * e;
        let rho = (1.0 - 0.5 * (g - 1.0) * be * be / (8.0 * g * PI * PI)).powf(1.0 / (g - 1.0));
        let k = self.beta / (2.0 * PI) * e;
        Primitive { rho, vel: [1.0 - k * dy, k * dx], p: rho.powf(g) }
    }

    pub fn state(&self, x: &[f64; 2], t: f64) -> Conserved<2> {
        self.gas.conserved(&self.primitive(x, t))
    }
}

/// Extruded isentropic vortex travelling in `+y` with unit background velocity.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IsentropicVortex3d {
    pub gas: Gas,
    pub c1: f64,
    pub c2: f64,
    pub p0: f64,
    pub pi_max: f64,
}

impl Default for IsentropicVortex3d {
    fn default() -> Self {
        let gas = Gas::default();
        Self { gas, c1: 7.5, c2: 7.5, p0: 1.0 / gas.gamma, pi_max: 0.4 }
    }
}

impl IsentropicVortex3d {
    pub fn primitive(&self, x: &[f64; 3], t: f64) -> Primitive<3> {
        let g = self.gas.gamma;
        let r = [-(x[1] - self.c2 - t), x[0] - self.c1, 0.0];
        let r2 = r[0] * r[0] + r[1] * r[1];
        let pi = self.pi_max * (0.5 * (1.0 - r2)).exp();
        let base = 1.0 - 0.5 * (g - 1.0) * pi * pi;
        let rho = base.powf(1.0 / (g - 1.0));
        let p = self.p0 * base.powf(g / (g - 1.0));
        Primitive { rho, vel: [pi * r[0], 1.0 + pi * r[1], pi * r[2]], p }
    }

    pub fn state(&self, x: &[f64; 3], t: f64) -> Conserved<3> {
        self.gas.conserved(&self.primitive(x, t))
    }
}

/// Downstream state of a normal shock of Mach number `mach` with upstream state `left`
/// (flow in `+x`): density and pressure from the jump ratios, velocity from mass flux
/// continuity.
pub fn rankine_hugoniot_right(gas: &Gas, left: &Primitive<2>, mach: f64) -> Primitive<2> {
    let g = gas.gamma;
    let m2 = mach * mach;
    let ratio = (2.0 + (g - 1.0) * m2) / ((g + 1.0) * m2);
    Primitive {
        rho: left.rho / ratio,
        vel: [left.vel[0] * ratio, 0.0],
        p: left.p * (1.0 + 2.0 * g / (g + 1.0) * (m2 - 1.0)),
    }
}

/// Stationary shock at `x = x_shock` superposed with an isentropic vortex upstream.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ShockVortex {
    pub gas: Gas,
    pub mach: f64,
    pub x_shock: f64,
    pub left: Primitive<2>,
    pub center: [f64; 2],
    pub eps: f64,
    pub alpha: f64,
    pub rc: f64,
}

impl Default for ShockVortex {
    fn default() -> Self {
        let gas = Gas::default();
        Self {
            gas,
            mach: 1.1,
            x_shock: 0.5,
            left: Primitive { rho: 1.0, vel: [gas.gamma.sqrt(), 0.0], p: 1.0 },
            center: [0.25, 0.5],
            eps: 0.3,
            alpha: 0.204,
            rc: 0.05,
        }
    }
}

impl ShockVortex {
    pub fn right(&self) -> Primitive<2> {
        rankine_hugoniot_right(&self.gas, &self.left, self.mach)
    }

    pub fn primitive(&self, x: &[f64; 2]) -> Primitive<2> {
        let g = self.gas.gamma;
        let shock = if x[0] < self.x_shock { self.left } else { self.right() };
        let dx = x[0] - self.center[0];
        let dy = x[1] - self.center[1];
        let tau2 = (dx * dx + dy * dy) / (self.rc * self.rc);
        let ex = (self.alpha * (1.0 - tau2)).exp();
        // v_theta sin(theta) and -v_theta cos(theta) with v_theta = eps tau e^{alpha(1 - tau^2)}
        let du = self.eps * dy / self.rc * ex;
        let dv = -self.eps * dx / self.rc * ex;
        let t_left = self.left.p / self.left.rho;
        let dt = -(g - 1.0) * self.eps * self.eps * ex * ex / (4.0 * self.alpha * g);
        let factor = ((t_left + dt) / t_left).powf(1.0 / (g - 1.0));
        Primitive {
            rho: shock.rho * factor,
            vel: [shock.vel[0] + du, shock.vel[1] + dv],
            p: shock.p * factor,
        }
    }

    pub fn state(&self, x: &[f64; 2]) -> Conserved<2> {
        self.gas.conserved(&self.primitive(x))
    }
}

/// Inviscid Taylor-Green vortex on `[-pi, pi]^3`.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct TaylorGreen {
    pub gas: Gas,
}

impl TaylorGreen {
    pub fn primitive(&self, x: &[f64; 3]) -> Primitive<3> {
        let (s1, c1) = x[0].sin_cos();
        let (s2, c2) = x[1].sin_cos();
        let c3 = x[2].cos();
        let p = 100.0 / self.gas.gamma
            + ((2.0 * x[0]).cos() + (2.0 * x[1]).cos()) * (2.0 + (2.0 * x[2]).cos()) / 16.0;
        Primitive { rho: 1.0, vel: [s1 * c2 * c3, -c1 * s2 * c3, 0.0], p }
    }

    pub fn state(&self, x: &[f64; 3]) -> Conserved<3> {
        self.gas.conserved(&self.primitive(x))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn vortex_2d_far_field() {
        let v = IsentropicVortex2d::default();
        let w = v.primitive(&[19.0, 4.9], 0.0);
        assert!((w.rho - 1.0).abs() < 1e-12);
        assert!((w.vel[0] - 1.0).abs() < 1e-12 && w.vel[1].abs() < 1e-12);
        assert!((w.p - 1.0).abs() < 1e-12);
    }

    #[test]
    fn vortex_2d_translates() {
        let v = IsentropicVortex2d::default();
        let a = v.primitive(&[5.3, 0.2], 0.0);
        let b = v.primitive(&[7.3, 0.2], 2.0);
        assert_eq!(a, b);
    }

    #[test]
    fn vortex_3d_center_and_far_field() {
        let v = IsentropicVortex3d::default();
        let far = v.primitive(&[0.1, 19.5, 1.0], 0.0);
        assert!((far.rho - 1.0).abs() < 1e-12 && (far.vel[1] - 1.0).abs() < 1e-12);
        assert!((far.p - 1.0 / 1.4).abs() < 1e-12);
        let c = v.primitive(&[7.5, 9.5, 2.0], 2.0);
        let g = 1.4f64;
        let pi = 0.4 * 0.5f64.exp();
        let base = 1.0 - 0.2 * pi * pi;
        assert!((c.rho - base.powf(1.0 / (g - 1.0))).abs() < 1e-14);
        assert_eq!(c.vel, [0.0, 1.0, 0.0]);
    }

    #[test]
    fn rankine_hugoniot_flux_continuity() {
        let gas = Gas::default();
        let mach = 1.1;
        // upstream velocity equal to mach times the sound speed
        let left = Primitive { rho: 1.0, vel: [mach * gas.gamma.sqrt(), 0.0], p: 1.0 };
        let right = rankine_hugoniot_right(&gas, &left, mach);
        let fl = gas.flux(&gas.conserved(&left), 0);
        let fr = gas.flux(&gas.conserved(&right), 0);
        assert!((fl - fr).max_abs() < 1e-12, "{fl:?} {fr:?}");
    }

    #[test]
    fn shock_vortex_states() {
        let sv = ShockVortex::default();
        let w = sv.primitive(&[0.1, 0.95]);
        let g = 1.4f64;
        assert!((w.rho - 1.0).abs() < 1e-6 && (w.vel[0] - g.sqrt()).abs() < 1e-6 && (w.p - 1.0).abs() < 1e-6);
        let r = sv.primitive(&[1.5, 0.5]);
        let exact = sv.right();
        assert!((r.rho - exact.rho).abs() < 1e-14 && (r.vel[0] - exact.vel[0]).abs() < 1e-14);
        assert!(r.vel[1].abs() < 1e-14 && (r.p - exact.p).abs() < 1e-14);
        let m2 = 1.21;
        assert!((r.rho - (g + 1.0) * m2 / (2.0 + (g - 1.0) * m2)).abs() < 1e-14);
        assert!(sv.gas.is_admissible(&sv.state(&sv.center)));
    }

    #[test]
    fn taylor_green_origin() {
        let tg = TaylorGreen::default();
        let w = tg.primitive(&[0.0; 3]);
        assert_eq!(w.rho, 1.0);
        assert_eq!(w.vel[2], 0.0);
        assert!((w.p - (100.0 / 1.4 + 0.375)).abs() < 1e-13);
    }
}

//! Fixed-step RK4 integration of the CTRV ODE.

/// Pose `(x, y, yaw)` after `t` seconds, integrated with step `h`.
pub fn integrate(x: f64, y: f64, yaw: f64, v: f64, w: f64, t: f64, h: f64) -> (f64, f64, f64) {
    let f = |s: [f64; 3]| [v * s[2].cos(), v * s[2].sin(), w];
    let steps = (t / h).round() as usize;
    let h = t / steps as f64;
    let mut s = [x, y, yaw];
    for _ in 0..steps {
        let k1 = f(s);
        let k2 = f([s[0] + h / 2.0 * k1[0], s[1] + h / 2.0 * k1[1], s[2] + h / 2.0 * k1[2]]);
        let k3 = f([s[0] + h / 2.0 * k2[0], s[1] + h / 2.0 * k2[1], s[2] + h / 2.0 * k2[2]]);
        let k4 = f([s[0] + h * k3[0], s[1] + h * k3[1], s[2] + h * k3[2]]);
        for i in 0..3 {
            s[i] += h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
        }
    }
    (s[0], s[1], s[2])
}

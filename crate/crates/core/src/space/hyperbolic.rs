//! The hyperbolic plane in the upper half-plane model.
//!
//! Tangent vectors at `z = x + iy` are written in the orthonormal frame
//! `(y ∂x, y ∂y)`, so their Euclidean norm is their hyperbolic length.

use num_complex::Complex64;

pub fn distance(z: Complex64, w: Complex64) -> f64 {
    2.0 * ((z - w).norm() / (2.0 * (z.im * w.im).sqrt())).asinh()
}

/// `log_z(w)` as an orthonormal-frame vector of length `d(z, w)`.
pub fn log(z: Complex64, w: Complex64) -> [f64; 2] {
    let d = distance(z, w);
    if d == 0.0 {
        return [0.0, 0.0];
    }
    // the Cayley map ζ ↦ (ζ - z)/(ζ - z̄) sends z to 0 with derivative 1/(2iy)
    let dir = Complex64::i() * (w - z) / (w - z.conj());
    let n = dir.norm();
    if n == 0.0 {
        return [0.0, 0.0];
    }
    let u = dir / n;
    [d * u.re, d * u.im]
}

/// `exp_z(v)` for an orthonormal-frame vector `v`.
pub fn exp(z: Complex64, v: [f64; 2]) -> Complex64 {
    let len = v[0].hypot(v[1]);
    if len == 0.0 {
        return z;
    }
    let u = Complex64::new(v[0] / len, v[1] / len);
    let zeta = -Complex64::i() * u * (0.5 * len).tanh();
    let out = (z - z.conj() * zeta) / (Complex64::new(1.0, 0.0) - zeta);
    Complex64::new(out.re, out.im.max(f64::MIN_POSITIVE))
}

/// Möbius action of `[[a, b], [c, d]]` with real entries and `ad - bc = 1`.
pub fn mobius(m: &[[f64; 2]; 2], z: Complex64) -> Complex64 {
    let num = z * m[0][0] + m[0][1];
    let den = z * m[1][0] + m[1][1];
    num / den
}

pub fn mat_mul(a: &[[f64; 2]; 2], b: &[[f64; 2]; 2]) -> [[f64; 2]; 2] {
    [
        [
            a[0][0] * b[0][0] + a[0][1] * b[1][0],
            a[0][0] * b[0][1] + a[0][1] * b[1][1],
        ],
        [
            a[1][0] * b[0][0] + a[1][1] * b[1][0],
            a[1][0] * b[0][1] + a[1][1] * b[1][1],
        ],
    ]
}

pub fn mat_inverse(a: &[[f64; 2]; 2]) -> [[f64; 2]; 2] {
    [[a[1][1], -a[0][1]], [-a[1][0], a[0][0]]]
}

/// `m^k` for an `SL(2, R)` matrix, `k` of either sign.
pub fn mat_pow(m: &[[f64; 2]; 2], k: i64) -> [[f64; 2]; 2] {
    let mut base = if k < 0 { mat_inverse(m) } else { *m };
    let mut acc = [[1.0, 0.0], [0.0, 1.0]];
    let mut e = k.unsigned_abs();
    while e > 0 {
        if e & 1 == 1 {
            acc = mat_mul(&acc, &base);
        }
        base = mat_mul(&base, &base);
        e >>= 1;
    }
    acc
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(x: f64, y: f64) -> Complex64 {
        Complex64::new(x, y)
    }

    #[test]
    fn distance_closed_form() {
        let d = distance(c(0.0, 1.0), c(1.0, 1.0));
        assert!((d.cosh() - 1.5).abs() < 1e-14);
        assert!((d - 0.962_423_650_119_206_9).abs() < 1e-12);
        assert!((distance(c(0.0, 1.0), c(0.0, 4.0)) - 4f64.ln()).abs() < 1e-14);
    }

    #[test]
    fn exp_inverts_log() {
        let pts = [c(0.0, 1.0), c(1.0, 1.0), c(-2.0, 0.3), c(0.5, 7.0)];
        for &z in &pts {
            for &w in &pts {
                let v = log(z, w);
                let back = exp(z, v);
                assert!((back - w).norm() < 1e-10 * (1.0 + w.norm()), "{z} {w} {back}");
                assert!((v[0].hypot(v[1]) - distance(z, w)).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn vertical_geodesic_midpoint() {
        let z = c(0.0, 1.0);
        let w = c(0.0, 4.0);
        let v = log(z, w);
        let m = exp(z, [0.5 * v[0], 0.5 * v[1]]);
        assert!((m - c(0.0, 2.0)).norm() < 1e-14);
        // the upward direction is (0, 1) in the orthonormal frame
        assert!(v[0].abs() < 1e-15 && v[1] > 0.0);
    }
}

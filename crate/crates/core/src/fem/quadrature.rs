//! Gauss-Legendre rules and 1D Lagrange shape functions on `[-1, 1]`.

/// Points and weights of the `n`-point Gauss-Legendre rule on `[-1, 1]`.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(n >= 1);
    let mut x = vec![0.0; n];
    let mut w = vec![0.0; n];
    for i in 0..n.div_ceil(2) {
        // Chebyshev-like initial guess, then Newton on P_n.
        let mut z = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (p, d) = legendre(n, z);
            dp = d;
            let dz = p / d;
            z -= dz;
            if dz.abs() < 1e-16 {
                break;
            }
        }
        let (_, d) = legendre(n, z);
        if d != 0.0 {
            dp = d;
        }
        x[i] = -z;
        x[n - 1 - i] = z;
        let wi = 2.0 / ((1.0 - z * z) * dp * dp);
        w[i] = wi;
        w[n - 1 - i] = wi;
    }
    if n % 2 == 1 {
        x[n / 2] = 0.0;
    }
    (x, w)
}

/// `(P_n(z), P_n'(z))`.
fn legendre(n: usize, z: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = z;
    if n == 0 {
        return (1.0, 0.0);
    }
    for k in 2..=n {
        let p2 = ((2 * k - 1) as f64 * z * p1 - (k - 1) as f64 * p0) / k as f64;
        p0 = p1;
        p1 = p2;
    }
    let d = n as f64 * (z * p1 - p0) / (z * z - 1.0);
    (p1, d)
}

/// Equispaced Lagrange basis of degree `order` on `[-1, 1]`: values and derivatives.
pub fn lagrange_1d(order: usize, xi: f64) -> (Vec<f64>, Vec<f64>) {
    let nodes: Vec<f64> = (0..=order).map(|k| -1.0 + 2.0 * k as f64 / order as f64).collect();
    let mut val = vec![1.0; order + 1];
    let mut der = vec![0.0; order + 1];
    for i in 0..=order {
        for j in 0..=order {
            if j != i {
                val[i] *= (xi - nodes[j]) / (nodes[i] - nodes[j]);
            }
        }
        for k in 0..=order {
            if k == i {
                continue;
            }
            let mut term = 1.0 / (nodes[i] - nodes[k]);
            for j in 0..=order {
                if j != i && j != k {
                    term *= (xi - nodes[j]) / (nodes[i] - nodes[j]);
                }
            }
            der[i] += term;
        }
    }
    (val, der)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn integrates_polynomials_exactly() {
        for n in 1..=12 {
            let (x, w) = gauss_legendre(n);
            assert!((w.iter().sum::<f64>() - 2.0).abs() < 1e-14);
            for deg in 0..2 * n {
                let q: f64 = x.iter().zip(&w).map(|(xi, wi)| wi * xi.powi(deg as i32)).sum();
                let exact = if deg % 2 == 1 { 0.0 } else { 2.0 / (deg as f64 + 1.0) };
                assert!((q - exact).abs() < 1e-13, "n={n} deg={deg}: {q} vs {exact}");
            }
        }
    }

    #[test]
    fn lagrange_partition_of_unity() {
        for order in 1..=2 {
            for &xi in &[-1.0, -0.3, 0.0, 0.71, 1.0] {
                let (v, d) = lagrange_1d(order, xi);
                assert!((v.iter().sum::<f64>() - 1.0).abs() < 1e-15);
                assert!(d.iter().sum::<f64>().abs() < 1e-14);
            }
            let (v, _) = lagrange_1d(order, -1.0);
            assert_eq!(v[0], 1.0);
        }
    }
}

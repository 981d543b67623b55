//! Periodized kernels Φ(y) = Σ_{λ∈Λ[N]} conj(y+λ)/‖y+λ‖^t by Ewald splitting.
//!
//! ρ^{−t} = ρ^{−t}Q(t/2, ρ²/σ²) + ρ^{−t}P(t/2, ρ²/σ²). The first part is summed
//! in real space. The second is entire in y, so its lattice sum is its zero
//! Fourier mode plus modes bounded by e^{−π²σ²|ω|²}, which are dropped.

use alloc::vec::Vec;

use crate::clifford::Paravector;
use crate::special::{gamma_p, gamma_q};
use crate::vahlen::Lattice;

#[derive(Clone, Debug)]
pub struct LatticeSum {
    lattice: Lattice,
    t: f64,
    sigma: f64,
    cutoff: f64,
    points: Vec<Paravector>,
    zero_const: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum LatticeSumError {
    /// t ≤ rank: the sum diverges.
    Divergent { t: f64, rank: usize },
    BadParameter(&'static str),
}

impl core::fmt::Display for LatticeSumError {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        match self {
            LatticeSumError::Divergent { t, rank } => {
                write!(f, "lattice sum with exponent {t} over rank {rank} diverges")
            }
            LatticeSumError::BadParameter(s) => write!(f, "{s}"),
        }
    }
}

/// Ewald width σ and real-space radius (in units of σ).
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EwaldParams {
    pub sigma: f64,
    pub cutoff: f64,
}

impl EwaldParams {
    /// Dropped reciprocal modes below ~1e-8 relative for level 3.
    pub const ACCURATE: EwaldParams = EwaldParams { sigma: 4.0, cutoff: 6.0 };
    /// Cheap setting for Monte-Carlo integrands (dropped modes ~1e-4 at level 3).
    pub const FAST: EwaldParams = EwaldParams { sigma: 2.5, cutoff: 3.5 };
}

impl Default for EwaldParams {
    fn default() -> Self {
        Self::ACCURATE
    }
}

impl LatticeSum {
    pub fn new(lattice: Lattice, t: f64, params: EwaldParams) -> Result<Self, LatticeSumError> {
        let m = lattice.rank();
        if t <= m as f64 {
            return Err(LatticeSumError::Divergent { t, rank: m });
        }
        if !(params.sigma > 0.0 && params.cutoff > 0.0) {
            return Err(LatticeSumError::BadParameter("sigma and cutoff must be positive"));
        }
        let level = lattice.level;
        let reach = params.cutoff * params.sigma + level * libm::sqrt(m as f64) / 2.0;
        let kmax = libm::ceil(reach / level) as i64;
        let mut points = Vec::new();
        let mut idx = alloc::vec![-kmax; m];
        loop {
            let lam = lattice.point(&idx);
            if lam.norm() <= reach {
                points.push(lam);
            }
            let mut i = 0;
            loop {
                if i == m {
                    break;
                }
                idx[i] += 1;
                if idx[i] > kmax {
                    idx[i] = -kmax;
                    i += 1;
                } else {
                    break;
                }
            }
            if i == m {
                break;
            }
        }
        points.sort_by(|a, b| a.norm_sqr().partial_cmp(&b.norm_sqr()).unwrap().then_with(|| {
            a.coords().partial_cmp(b.coords()).unwrap()
        }));
        let mf = m as f64;
        let zero_const = libm::pow(core::f64::consts::PI, mf / 2.0) * libm::tgamma((t - mf) / 2.0)
            / (lattice.covolume() * libm::tgamma(t / 2.0));
        Ok(Self { lattice, t, sigma: params.sigma, cutoff: params.cutoff, points, zero_const })
    }

    pub fn exponent(&self) -> f64 {
        self.t
    }

    pub fn lattice(&self) -> &Lattice {
        &self.lattice
    }

    /// Size of the dropped reciprocal modes relative to the kernel scale.
    pub fn reciprocal_bound(&self) -> f64 {
        let w = core::f64::consts::PI * self.sigma / self.lattice.level;
        libm::exp(-w * w)
    }

    pub fn term_count(&self) -> usize {
        self.points.len()
    }

    /// y reduced into the centred cell [−N/2, N/2) on the lattice coordinates.
    pub fn reduce(&self, y: &Paravector) -> Paravector {
        let level = self.lattice.level;
        let mut z = *y;
        for i in 0..self.lattice.rank() {
            let v = y.get(i);
            z.set(i, v - level * libm::floor(v / level + 0.5));
        }
        z
    }

    /// Zero Fourier mode of the smooth part at y (depends on y⊥ only).
    pub fn zero_mode(&self, y: &Paravector) -> Paravector {
        let m = self.lattice.rank();
        let n = y.dim();
        let mut perp = Paravector::zero(n);
        let mut h2 = 0.0;
        for i in m..=n {
            perp.set(i, y.get(i));
            h2 += y.get(i) * y.get(i);
        }
        let mf = m as f64;
        let a = (self.t - mf) / 2.0;
        let scale = self.zero_const
            * libm::pow(h2, (mf - self.t) / 2.0)
            * gamma_p(a, h2 / (self.sigma * self.sigma));
        perp.conj().scale(scale)
    }

    /// Exact zero mode of the full periodized kernel.
    pub fn zero_mode_exact(&self, y: &Paravector) -> Paravector {
        let m = self.lattice.rank();
        let n = y.dim();
        let mut perp = Paravector::zero(n);
        let mut h2 = 0.0;
        for i in m..=n {
            perp.set(i, y.get(i));
            h2 += y.get(i) * y.get(i);
        }
        let mf = m as f64;
        perp.conj().scale(self.zero_const * libm::pow(h2, (mf - self.t) / 2.0))
    }

    /// Φ(y).
    pub fn eval(&self, y: &Paravector) -> Paravector {
        let z = self.reduce(y);
        let n = y.dim();
        let r2max = (self.cutoff * self.sigma) * (self.cutoff * self.sigma);
        let s2 = self.sigma * self.sigma;
        let a = self.t / 2.0;
        let mut acc = [0.0f64; crate::clifford::MAX_DIM + 1];
        for lam in &self.points {
            let w = z.add(lam);
            let r2 = w.norm_sqr();
            if r2 > r2max {
                continue;
            }
            let f = libm::pow(r2, -a) * gamma_q(a, r2 / s2);
            acc[0] += w.get(0) * f;
            for (i, slot) in acc.iter_mut().enumerate().take(n + 1).skip(1) {
                *slot -= w.get(i) * f;
            }
        }
        let zm = self.zero_mode(&z);
        let mut out = Paravector::zero(n);
        for (i, v) in acc.iter().enumerate().take(n + 1) {
            out.set(i, v + zm.get(i));
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn lat() -> Lattice {
        Lattice::for_level(3, 2, 3.0).unwrap()
    }

    #[test]
    fn independent_of_sigma() {
        let y = Paravector::new(&[0.4, -1.1, 0.7, 0.8]);
        let a = LatticeSum::new(lat(), 6.0, EwaldParams { sigma: 4.0, cutoff: 6.5 }).unwrap().eval(&y);
        let b = LatticeSum::new(lat(), 6.0, EwaldParams { sigma: 5.0, cutoff: 6.5 }).unwrap().eval(&y);
        assert!(a.max_abs_diff(&b) < 1e-9, "{a:?} {b:?}");
    }

    #[test]
    fn periodic() {
        let s = LatticeSum::new(lat(), 8.0, EwaldParams::ACCURATE).unwrap();
        let y = Paravector::new(&[0.4, -1.1, 0.7, 0.8]);
        let z = y.add(&Paravector::new(&[3.0, -6.0, 3.0, 0.0]));
        assert!(s.eval(&y).max_abs_diff(&s.eval(&z)) < 1e-13);
    }

    #[test]
    fn matches_direct_sum_when_absolutely_convergent() {
        // t = 10 over a rank-3 lattice: terms decay like ρ^{-9}
        let s = LatticeSum::new(lat(), 10.0, EwaldParams::ACCURATE).unwrap();
        let y = Paravector::new(&[0.2, 0.3, -0.4, 0.9]);
        let mut direct = Paravector::zero(3);
        let k = 30i64;
        for a in -k..=k {
            for b in -k..=k {
                for c in -k..=k {
                    let w = y.add(&Paravector::new(&[3.0 * a as f64, 3.0 * b as f64, 3.0 * c as f64, 0.0]));
                    direct = direct.add(&w.conj().scale(libm::pow(w.norm_sqr(), -5.0)));
                }
            }
        }
        // remaining tail: only the e_n part survives, ≈ zero-mode integral outside the box
        let e = s.eval(&y);
        assert!(e.max_abs_diff(&direct) < 1e-9, "{e:?} {direct:?}");
    }

    #[test]
    fn divergent_exponent_rejected() {
        assert!(LatticeSum::new(lat(), 3.0, EwaldParams::ACCURATE).is_err());
    }
}

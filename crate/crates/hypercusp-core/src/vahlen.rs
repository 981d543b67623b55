//! Vahlen matrices, Möbius action, the groups Γ_p and their level-N
//! congruence subgroups over the standard order O_p = ⊕ Z e_A (A ⊆ {1..p}).

use alloc::collections::{BTreeMap, BTreeSet, VecDeque};
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

use crate::clifford::{grade, mul_mv_para, CliffordError, Multivector, Paravector};
use crate::scalar::Scalar;
use crate::tolerances::PSEUDO_DET;

#[derive(Debug, Clone, PartialEq)]
pub enum VahlenError {
    /// cx + d vanishes (or is not invertible) at the evaluation point.
    Pole,
    NonIntegral,
    /// Level below N₀ = 3.
    LevelTooSmall(i64),
    /// p outside 0..n−1.
    BadP { p: usize, n: usize },
    Clifford(CliffordError),
}

impl fmt::Display for VahlenError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            VahlenError::Pole => write!(f, "pole: cx+d is not invertible"),
            VahlenError::NonIntegral => write!(f, "matrix entries are not in the standard order"),
            VahlenError::LevelTooSmall(n) => write!(f, "level {n} below 3"),
            VahlenError::BadP { p, n } => write!(f, "p = {p} must satisfy 0 <= p <= n-1 = {}", n - 1),
            VahlenError::Clifford(e) => write!(f, "{e}"),
        }
    }
}

#[cfg(feature = "std")]
impl std::error::Error for VahlenError {}

impl From<CliffordError> for VahlenError {
    fn from(e: CliffordError) -> Self {
        VahlenError::Clifford(e)
    }
}

/// Inverse of an element of the Clifford group: v^{-1} = conj(v)/‖v‖².
pub fn clifford_group_inverse(v: &Multivector) -> Result<Multivector, VahlenError> {
    let n2 = v.norm_sqr();
    if n2 == 0.0 || !n2.is_finite() {
        return Err(VahlenError::Pole);
    }
    let inv = v.conjugation().scale_real(1.0 / n2);
    let prod = v * &inv;
    let mut off = 0.0f64;
    for (m, c) in prod.coeffs().iter().enumerate() {
        let target = if m == 0 { 1.0 } else { 0.0 };
        off = off.max((c - target).abs());
    }
    if off > 1e-9 {
        return Err(VahlenError::Pole);
    }
    Ok(inv)
}

/// 2×2 Clifford matrix (a, b; c, d).
#[derive(Clone, PartialEq, Debug)]
pub struct VahlenMatrix {
    pub a: Multivector,
    pub b: Multivector,
    pub c: Multivector,
    pub d: Multivector,
    /// Entries are known to be products of paravectors (built from generator
    /// words or explicit factors).
    pub certified: bool,
}

impl VahlenMatrix {
    /// Uncertified matrix from arbitrary entries.
    pub fn new(a: Multivector, b: Multivector, c: Multivector, d: Multivector) -> Self {
        Self { a, b, c, d, certified: false }
    }

    pub fn dim(&self) -> usize {
        self.a.dim()
    }

    pub fn identity(n: usize) -> Self {
        let one = Multivector::one(n);
        let zero = Multivector::zero(n);
        Self { a: one.clone(), b: zero.clone(), c: zero, d: one, certified: true }
    }

    /// J = (0, −1; 1, 0).
    pub fn j(n: usize) -> Self {
        let one = Multivector::one(n);
        let zero = Multivector::zero(n);
        Self { a: zero.clone(), b: -&one, c: one, d: zero, certified: true }
    }

    /// T_t = (1, t; 0, 1).
    pub fn translation(t: &Paravector) -> Self {
        let n = t.dim();
        let mut m = Self::identity(n);
        m.b = t.to_mv();
        m
    }

    /// (1, 0; t, 1).
    pub fn lower(t: &Paravector) -> Self {
        let n = t.dim();
        let mut m = Self::identity(n);
        m.c = t.to_mv();
        m
    }

    pub fn mul(&self, o: &Self) -> Self {
        Self {
            a: &(&self.a * &o.a) + &(&self.b * &o.c),
            b: &(&self.a * &o.b) + &(&self.b * &o.d),
            c: &(&self.c * &o.a) + &(&self.d * &o.c),
            d: &(&self.c * &o.b) + &(&self.d * &o.d),
            certified: self.certified && o.certified,
        }
    }

    /// a·rev(d) − b·rev(c).
    pub fn pseudo_det(&self) -> Multivector {
        &(&self.a * &self.d.reversion()) - &(&self.b * &self.c.reversion())
    }

    /// a·d* − b·c*, exposed for comparison with the tilde pairing.
    pub fn pseudo_det_star(&self) -> Multivector {
        &(&self.a * &self.d.star()) - &(&self.b * &self.c.star())
    }

    /// Inverse for pseudo-determinant 1: (rev d, −rev b; −rev c, rev a).
    pub fn inverse_sav(&self) -> Self {
        Self {
            a: self.d.reversion(),
            b: -&self.b.reversion(),
            c: -&self.c.reversion(),
            d: self.a.reversion(),
            certified: self.certified,
        }
    }

    pub fn neg(&self) -> Self {
        Self { a: -&self.a, b: -&self.b, c: -&self.c, d: -&self.d, certified: self.certified }
    }

    /// Conditions (ii) and (iii); condition (i) is the `certified` flag.
    pub fn is_vahlen(&self) -> bool {
        let tol = 1e-12;
        let pd = self.pseudo_det();
        let scale = 1.0 + self.a.norm() * self.d.norm() + self.b.norm() * self.c.norm();
        let off: f64 = pd.coeffs()[1..].iter().map(|c| c.abs()).fold(0.0, f64::max);
        if off > tol * scale || pd.scalar_part().abs() <= tol * scale {
            return false;
        }
        let para = |m: &Multivector| m.is_paravector(tol * (1.0 + m.norm()));
        if !self.c.is_zero() {
            let Ok(ci) = clifford_group_inverse(&self.c) else { return false };
            para(&(&self.a * &ci)) && para(&(&ci * &self.d))
        } else {
            let Ok(di) = clifford_group_inverse(&self.d) else { return false };
            para(&(&self.b * &di))
        }
    }

    /// Vahlen with pseudo-determinant exactly 1 (within 1e-12).
    pub fn is_sav(&self) -> bool {
        if !self.is_vahlen() {
            return false;
        }
        let pd = self.pseudo_det();
        (pd.scalar_part() - 1.0).abs() <= PSEUDO_DET
    }

    /// cx + d.
    pub fn denominator(&self, x: &Paravector) -> Multivector {
        let mut v = mul_mv_para(&self.c, x);
        v += &self.d;
        v
    }

    /// M<x> = (ax + b)(cx + d)^{-1}.
    pub fn mobius_apply(&self, x: &Paravector) -> Result<Paravector, VahlenError> {
        let den = self.denominator(x);
        let inv = clifford_group_inverse(&den)?;
        let mut num = mul_mv_para(&self.a, x);
        num += &self.b;
        let y = &num * &inv;
        let p = Paravector::from_mv(&y);
        if !p.is_finite() {
            return Err(VahlenError::Pole);
        }
        Ok(p)
    }

    /// Largest non-paravector coefficient of (ax+b)(cx+d)^{-1}; zero for Vahlen M.
    pub fn mobius_leakage(&self, x: &Paravector) -> Result<f64, VahlenError> {
        let den = self.denominator(x);
        let inv = clifford_group_inverse(&den)?;
        let mut num = mul_mv_para(&self.a, x);
        num += &self.b;
        Ok((&num * &inv).non_paravector_residual())
    }

    /// conj(cx+d)/‖cx+d‖^{n+1−k}.
    pub fn automorphy_factor(&self, x: &Paravector, k: i32) -> Result<Multivector, VahlenError> {
        let n = self.dim() as i32;
        let den = self.denominator(x);
        let r2 = den.norm_sqr();
        if r2 == 0.0 {
            return Err(VahlenError::Pole);
        }
        Ok(den.conjugation().scale_real(pow_norm(r2, -(n + 1 - k))))
    }

    /// Whether every coefficient is an integer.
    pub fn is_integral(&self) -> bool {
        [&self.a, &self.b, &self.c, &self.d]
            .iter()
            .all(|m| m.coeffs().iter().all(|c| (c - libm::round(*c)).abs() < 1e-9))
    }

    /// a − 1, b, c, d − 1 ∈ N·O_p.
    pub fn in_congruence_subgroup(&self, level: i64) -> Result<bool, VahlenError> {
        if !self.is_integral() {
            return Err(VahlenError::NonIntegral);
        }
        let one = Multivector::one(self.dim());
        let entries = [&self.a - &one, self.b.clone(), self.c.clone(), &self.d - &one];
        Ok(entries.iter().all(|m| m.coeffs().iter().all(|&c| (libm::round(c) as i64) % level == 0)))
    }

    /// Entries reduced mod N, flattened.
    pub fn residues(&self, level: i64) -> Vec<i64> {
        [&self.a, &self.b, &self.c, &self.d]
            .iter()
            .flat_map(|m| m.coeffs().iter().map(move |&c| (libm::round(c) as i64).rem_euclid(level)))
            .collect()
    }

    /// Bottom-row norm (‖c‖² + ‖d‖²)^{1/2}.
    pub fn row_norm(&self) -> f64 {
        libm::sqrt(self.c.norm_sqr() + self.d.norm_sqr())
    }
}

/// r2^{e/2} for integer e, avoiding `pow` on the hot path.
#[inline]
pub fn pow_norm(r2: f64, e: i32) -> f64 {
    let half = e / 2;
    let base = libm::pow(r2, half as f64);
    if e % 2 == 0 {
        base
    } else if e > 0 {
        base * libm::sqrt(r2)
    } else {
        base / libm::sqrt(r2)
    }
}

/// J, T_1, T_{e_1}, …, T_{e_p} acting on H⁺ ⊂ R ⊕ R^n.
pub fn generators(n: usize, p: usize) -> Result<Vec<VahlenMatrix>, VahlenError> {
    if p + 1 > n {
        return Err(VahlenError::BadP { p, n });
    }
    let mut g = vec![VahlenMatrix::j(n)];
    for i in 0..=p {
        g.push(VahlenMatrix::translation(&Paravector::unit(n, i)));
    }
    Ok(g)
}

/// Generators and their inverses.
pub fn symmetric_generators(n: usize, p: usize) -> Result<Vec<VahlenMatrix>, VahlenError> {
    let g = generators(n, p)?;
    let mut out = Vec::with_capacity(2 * g.len());
    for m in g {
        let inv = m.inverse_sav();
        out.push(m);
        out.push(inv);
    }
    Ok(out)
}

/// Translations by ±N e_i and the transposed lower-triangular matrices; all in Γ[N].
pub fn level_generators(n: usize, p: usize, level: i64) -> Vec<VahlenMatrix> {
    let mut out = Vec::new();
    for i in 0..=p {
        for s in [1.0, -1.0] {
            let t = Paravector::unit(n, i).scale(s * level as f64);
            out.push(VahlenMatrix::translation(&t));
            let mut l = VahlenMatrix::lower(&t);
            // (1,0;t,1) has pseudo-det 1 only when t is a paravector, which it is.
            l.certified = true;
            out.push(l);
        }
    }
    out
}

/// Blades spanning Cl_p inside Cl_n.
pub fn order_blades(p: usize) -> Vec<usize> {
    (0..1usize << p).collect()
}

/// Λ[N] = N·(Z + Ze_1 + … + Ze_p) inside R ⊕ R^n, with its dual.
#[derive(Clone, Debug, PartialEq)]
pub struct Lattice {
    pub n: usize,
    pub p: usize,
    pub level: f64,
    pub basis: Vec<Paravector>,
}

impl Lattice {
    pub fn for_level(n: usize, p: usize, level: f64) -> Result<Self, VahlenError> {
        if p + 1 > n {
            return Err(VahlenError::BadP { p, n });
        }
        let basis = (0..=p).map(|i| Paravector::unit(n, i).scale(level)).collect();
        Ok(Self { n, p, level, basis })
    }

    pub fn rank(&self) -> usize {
        self.p + 1
    }

    /// Dual basis: ⟨basis_i, dual_j⟩ = δ_ij.
    pub fn dual(&self) -> Self {
        let basis = self.basis.iter().map(|b| b.scale(1.0 / b.norm_sqr())).collect();
        Self { n: self.n, p: self.p, level: 1.0 / self.level, basis }
    }

    /// Gram matrix of ⟨basis_i, other_j⟩.
    pub fn pairing(&self, other: &Self) -> Vec<Vec<f64>> {
        self.basis.iter().map(|a| other.basis.iter().map(|b| a.dot(b)).collect()).collect()
    }

    /// [0, N]^{p+1} as (lower, upper) per coordinate x_0..x_p.
    pub fn period_cell(&self) -> Vec<(f64, f64)> {
        (0..=self.p).map(|_| (0.0, self.level)).collect()
    }

    pub fn covolume(&self) -> f64 {
        libm::pow(self.level, (self.p + 1) as f64)
    }

    /// Σ m_i·basis_i.
    pub fn point(&self, m: &[i64]) -> Paravector {
        let mut x = Paravector::zero(self.n);
        for (i, &mi) in m.iter().enumerate() {
            x = x.add(&self.basis[i].scale(mi as f64));
        }
        x
    }
}

/// Bottom row of a coset T\Γ[N]; left translations fix it.
#[derive(Clone, Debug, PartialEq)]
pub struct CosetKey {
    pub c: Multivector,
    pub d: Multivector,
}

impl CosetKey {
    /// Integer coordinates over the Cl_p blades, c first.
    pub fn int_key(&self, p: usize) -> Vec<i64> {
        let m = 1usize << p;
        let mut k: Vec<i64> = self.c.coeffs()[..m].iter().map(|&x| libm::round(x) as i64).collect();
        k.extend(self.d.coeffs()[..m].iter().map(|&x| libm::round(x) as i64));
        k
    }
}

#[derive(Clone, Debug)]
pub struct Coset {
    pub key: CosetKey,
    pub rep: VahlenMatrix,
}

/// How cosets are found.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Enumeration {
    /// Lattice enumeration of bottom rows certified by a Euclidean reduction.
    Arithmetic,
    /// Breadth-first words in the generators up to the given length.
    Words(usize),
}

fn int_mv(n: usize, p: usize, v: &[i64]) -> Multivector {
    let mut m = Multivector::zero(n);
    for (b, &x) in v.iter().enumerate().take(1 << p) {
        m[b] = x as f64;
    }
    m
}

fn round_para(n: usize, p: usize, y: &Multivector) -> Paravector {
    let mut t = Paravector::zero(n);
    for i in 0..=p {
        t.set(i, libm::round(y[Paravector::mask(i)]));
    }
    t
}

/// Diagonal group elements diag(·, u) for every unit ±e_A of O_p.
///
/// (T_{b⁻¹}J)(T_bJ)(T_{b⁻¹}J) = diag(−b⁻¹, −b) for a paravector unit b; products
/// over the factors of e_A and a final J² cover all signs.
fn unit_diagonals(n: usize, p: usize) -> BTreeMap<Vec<i64>, VahlenMatrix> {
    let j = VahlenMatrix::j(n);
    let diag = |b: &Paravector| {
        let bi = b.inverse().expect("unit");
        let x = VahlenMatrix::translation(&bi).mul(&j);
        let y = VahlenMatrix::translation(b).mul(&j);
        x.mul(&y).mul(&x)
    };
    let minus = j.mul(&j);
    let mut found = BTreeMap::new();
    for a in 0..1usize << p {
        let mut m = VahlenMatrix::identity(n);
        for i in 0..p {
            if a >> i & 1 == 1 {
                m = m.mul(&diag(&Paravector::unit(n, i + 1)));
            }
        }
        for s in [m.clone(), m.mul(&minus)] {
            debug_assert!(s.c.is_zero() && s.b.is_zero());
            let u: Vec<i64> = s.d.coeffs()[..1 << p].iter().map(|&x| libm::round(x) as i64).collect();
            found.insert(u, s);
        }
    }
    found
}

/// Row reduction (c, d) → (0, u) by right multiplication with T_λ and J.
/// Returns u and the inverse word V with (0, u)·V = (c, d).
fn euclid_certificate(
    n: usize,
    p: usize,
    c: &Multivector,
    d: &Multivector,
) -> Option<(Vec<i64>, VahlenMatrix)> {
    let mut c = c.clone();
    let mut d = d.clone();
    let mut v = VahlenMatrix::identity(n);
    let jinv = VahlenMatrix::j(n).inverse_sav();
    for _ in 0..256 {
        if c.is_zero() {
            let u: Vec<i64> = d.coeffs()[..1 << p].iter().map(|&x| libm::round(x) as i64).collect();
            return Some((u, v));
        }
        let ci = clifford_group_inverse(&c).ok()?;
        let r = &ci * &d;
        let lam = round_para(n, p, &(-&r));
        let t = VahlenMatrix::translation(&lam);
        d = &mul_mv_para(&c, &lam) + &d;
        v = t.inverse_sav().mul(&v);
        if d.is_zero() {
            // c divides d: only primitive when c is a unit, handled after swap
        }
        let nc = d.clone();
        d = -&c;
        c = nc;
        v = jinv.mul(&v);
    }
    None
}

/// Left cosets T\Γ_p[N] with ‖c‖² + ‖d‖² ≤ R², sorted by integer key.
pub fn enumerate_cosets(
    n: usize,
    p: usize,
    level: i64,
    radius: f64,
    method: Enumeration,
) -> Result<Vec<Coset>, VahlenError> {
    enumerate_cosets_by(n, p, level, method, &|c2, d2| c2 + d2 <= radius * radius + 1e-9, radius)
}

/// Cosets with ‖c‖ ≤ rc (any d), one per orbit of right translations by Λ[N]:
/// the representative has c^{-1}d in [0, N)^{p+1}.
pub fn enumerate_coset_orbits(n: usize, p: usize, level: i64, rc: f64) -> Result<Vec<Coset>, VahlenError> {
    check_level(n, p, level)?;
    let mut out = Vec::new();
    let unit_mats = unit_diagonals(n, p);
    out.push(identity_coset(n));
    let nl = level as f64;
    for c in order_points(p, level, rc, true) {
        if c.iter().all(|&x| x == 0) {
            continue;
        }
        let cm = int_mv(n, p, &c);
        let c2 = cm.norm_sqr();
        // d = c·r, r ∈ [0,N)^{p+1}: ‖d‖ ≤ ‖c‖·N·√(p+1)
        let dmax = libm::sqrt(c2) * nl * libm::sqrt((p + 1) as f64) + 1.0;
        let ci = clifford_group_inverse(&cm)?;
        for d in order_points_shifted(p, level, dmax) {
            let dm = int_mv(n, p, &d);
            let r = &ci * &dm;
            if !r.is_paravector(1e-9) {
                continue;
            }
            let in_cell = (0..=p).all(|i| {
                let x = r[Paravector::mask(i)];
                x > -1e-9 && x < nl - 1e-9
            });
            if !in_cell {
                continue;
            }
            if let Some(rep) = certify_row(n, p, level, &cm, &dm, &unit_mats) {
                out.push(Coset { key: CosetKey { c: cm.clone(), d: dm }, rep });
            }
        }
        let _ = c2;
    }
    sort_cosets(p, &mut out);
    Ok(out)
}

fn check_level(n: usize, p: usize, level: i64) -> Result<(), VahlenError> {
    if p + 1 > n {
        return Err(VahlenError::BadP { p, n });
    }
    if level < 3 {
        return Err(VahlenError::LevelTooSmall(level));
    }
    Ok(())
}

fn identity_coset(n: usize) -> Coset {
    Coset {
        key: CosetKey { c: Multivector::zero(n), d: Multivector::one(n) },
        rep: VahlenMatrix::identity(n),
    }
}

fn sort_cosets(p: usize, v: &mut [Coset]) {
    v.sort_by(|x, y| {
        let nx = x.key.c.norm_sqr() + x.key.d.norm_sqr();
        let ny = y.key.c.norm_sqr() + y.key.d.norm_sqr();
        nx.partial_cmp(&ny).unwrap().then_with(|| x.key.int_key(p).cmp(&y.key.int_key(p)))
    });
}

/// Integer points of O_p ≅ Z^{2^p} congruent to 0 mod N with norm ≤ r.
fn order_points(p: usize, level: i64, r: f64, zero_class: bool) -> Vec<Vec<i64>> {
    let dim = 1usize << p;
    let mut out = Vec::new();
    let shift = if zero_class { 0 } else { 1 };
    let m = libm::floor(r / level as f64) as i64 + 1;
    let mut idx = vec![-m; dim];
    loop {
        let v: Vec<i64> = idx
            .iter()
            .enumerate()
            .map(|(b, &t)| level * t + if b == 0 { shift } else { 0 })
            .collect();
        let n2: i64 = v.iter().map(|x| x * x).sum();
        if (n2 as f64) <= r * r + 1e-9 {
            out.push(v);
        }
        let mut i = 0;
        loop {
            if i == dim {
                return out;
            }
            idx[i] += 1;
            if idx[i] > m {
                idx[i] = -m;
                i += 1;
            } else {
                break;
            }
        }
    }
}

/// Points ≡ 1 mod N (d-class of Γ[N] rows) with norm ≤ r.
fn order_points_shifted(p: usize, level: i64, r: f64) -> Vec<Vec<i64>> {
    order_points(p, level, r, false)
}

/// Certifies that (c, d) is the bottom row of an element of Γ_p[N] and builds one.
fn certify_row(
    n: usize,
    p: usize,
    level: i64,
    c: &Multivector,
    d: &Multivector,
    unit_mats: &BTreeMap<Vec<i64>, VahlenMatrix>,
) -> Option<VahlenMatrix> {
    let (u, v) = euclid_certificate(n, p, c, d)?;
    let um = unit_mats.get(&u)?;
    let m0 = um.mul(&v);
    // Top row is fixed up to T_μ; need b ≡ paravector mod N.
    let b = &m0.b;
    for (blade, &x) in b.coeffs().iter().enumerate() {
        let xi = libm::round(x) as i64;
        if grade(blade) > 1 && xi.rem_euclid(level) != 0 {
            return None;
        }
    }
    let mut mu = Paravector::zero(n);
    for i in 0..=p {
        let xi = libm::round(b[Paravector::mask(i)]) as i64;
        // μ ≡ −b (mod N) on the paravector blades, reduced to |μ_i| ≤ N/2
        let mut r = (-xi).rem_euclid(level);
        if 2 * r > level {
            r -= level;
        }
        mu.set(i, r as f64);
    }
    let rep = VahlenMatrix::translation(&mu).mul(&m0);
    debug_assert!(rep.in_congruence_subgroup(level).unwrap_or(false));
    if !rep.in_congruence_subgroup(level).ok()? {
        return None;
    }
    Some(rep)
}

fn enumerate_cosets_by(
    n: usize,
    p: usize,
    level: i64,
    method: Enumeration,
    keep: &dyn Fn(f64, f64) -> bool,
    radius: f64,
) -> Result<Vec<Coset>, VahlenError> {
    check_level(n, p, level)?;
    match method {
        Enumeration::Arithmetic => {
            let unit_mats = unit_diagonals(n, p);
            let mut out = Vec::new();
            if keep(0.0, 1.0) {
                out.push(identity_coset(n));
            }
            let ds = order_points_shifted(p, level, radius);
            for c in order_points(p, level, radius, true) {
                if c.iter().all(|&x| x == 0) {
                    continue;
                }
                let cm = int_mv(n, p, &c);
                let c2 = cm.norm_sqr();
                let cbar = cm.conjugation();
                for d in &ds {
                    let d2: f64 = d.iter().map(|&x| (x * x) as f64).sum();
                    if !keep(c2, d2) {
                        continue;
                    }
                    let dm = int_mv(n, p, d);
                    if !(&cbar * &dm).is_paravector(1e-9) {
                        continue;
                    }
                    if let Some(rep) = certify_row(n, p, level, &cm, &dm, &unit_mats) {
                        out.push(Coset { key: CosetKey { c: cm.clone(), d: dm }, rep });
                    }
                }
            }
            sort_cosets(p, &mut out);
            Ok(out)
        }
        Enumeration::Words(max_len) => {
            let gens = symmetric_generators(n, p)?;
            let unit_mats = unit_diagonals(n, p);
            let mut rows: BTreeMap<Vec<i64>, Coset> = BTreeMap::new();
            let mut seen: BTreeSet<Vec<i64>> = BTreeSet::new();
            let id = VahlenMatrix::identity(n);
            seen.insert(id.residues(i64::MAX));
            let mut frontier = vec![id];
            let bound = 4.0 * radius + 4.0;
            for _ in 0..=max_len {
                let mut next_frontier = Vec::new();
                for m in &frontier {
                    let c2 = m.c.norm_sqr();
                    let d2 = m.d.norm_sqr();
                    let cong = m
                        .c
                        .coeffs()
                        .iter()
                        .all(|&x| (libm::round(x) as i64).rem_euclid(level) == 0)
                        && (&m.d - &Multivector::one(n))
                            .coeffs()
                            .iter()
                            .all(|&x| (libm::round(x) as i64).rem_euclid(level) == 0);
                    if cong && keep(c2, d2) {
                        let key = CosetKey { c: m.c.clone(), d: m.d.clone() };
                        let ik = key.int_key(p);
                        if let alloc::collections::btree_map::Entry::Vacant(e) = rows.entry(ik) {
                            if let Some(rep) = if c2 == 0.0 {
                                ((d2 - 1.0).abs() < 1e-9 && m.d[0] > 0.0).then(|| VahlenMatrix::identity(n))
                            } else {
                                certify_row(n, p, level, &m.c, &m.d, &unit_mats)
                            } {
                                e.insert(Coset { key, rep });
                            }
                        }
                    }
                    for g in &gens {
                        let nm = m.mul(g);
                        let big = [&nm.a, &nm.b, &nm.c, &nm.d].iter().any(|e| e.norm() > bound);
                        if big {
                            continue;
                        }
                        if seen.insert(nm.residues(i64::MAX)) {
                            next_frontier.push(nm);
                        }
                    }
                }
                frontier = next_frontier;
            }
            let mut out: Vec<Coset> = rows.into_values().collect();
            sort_cosets(p, &mut out);
            Ok(out)
        }
    }
}

/// One matrix per class of Γ_p modulo Γ_p[N], identity first.
pub fn congruence_representatives(n: usize, p: usize, level: i64) -> Result<Vec<VahlenMatrix>, VahlenError> {
    check_level(n, p, level)?;
    let gens = symmetric_generators(n, p)?;
    let id = VahlenMatrix::identity(n);
    let mut seen: BTreeSet<Vec<i64>> = BTreeSet::new();
    seen.insert(id.residues(level));
    let mut out = vec![id.clone()];
    let mut queue = VecDeque::from([id]);
    while let Some(m) = queue.pop_front() {
        for g in &gens {
            let nm = m.mul(g);
            if seen.insert(nm.residues(level)) {
                out.push(nm.clone());
                queue.push_back(nm);
            }
        }
    }
    Ok(out)
}

/// Elements of Γ_p[N] given as words of length ≤ L in `level_generators`,
/// deduplicated by whole matrix.
pub fn level_words(n: usize, p: usize, level: i64, max_len: usize) -> Vec<VahlenMatrix> {
    let gens = level_generators(n, p, level);
    let id = VahlenMatrix::identity(n);
    let mut seen: BTreeSet<Vec<i64>> = BTreeSet::new();
    seen.insert(id.residues(i64::MAX));
    let mut out = vec![id.clone()];
    let mut frontier = vec![id];
    for _ in 0..max_len {
        let mut next = Vec::new();
        for m in &frontier {
            for g in &gens {
                let nm = m.mul(g);
                if seen.insert(nm.residues(i64::MAX)) {
                    out.push(nm.clone());
                    next.push(nm);
                }
            }
        }
        frontier = next;
    }
    out
}

impl<S: Scalar> Multivector<S> {
    /// Whether the blade mask lies in Cl_p.
    pub fn in_subalgebra(&self, p: usize) -> bool {
        self.coeffs().iter().enumerate().all(|(m, c)| m >> p == 0 || c.abs_sqr() == 0.0)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn para(c: &[f64]) -> Paravector {
        Paravector::new(c)
    }

    #[test]
    fn mobius_examples() {
        let x = para(&[0.3, -0.2, 0.1, 0.7]);
        let id = VahlenMatrix::identity(3);
        assert!(id.mobius_apply(&x).unwrap().max_abs_diff(&x) < 1e-15);
        let t1 = VahlenMatrix::translation(&Paravector::unit(3, 0));
        assert!(t1.mobius_apply(&x).unwrap().max_abs_diff(&para(&[1.3, -0.2, 0.1, 0.7])) < 1e-15);
        let en = Paravector::unit(3, 3);
        let j = VahlenMatrix::j(3);
        assert!(j.mobius_apply(&en).unwrap().max_abs_diff(&en) < 1e-15);
    }

    #[test]
    fn automorphy_examples() {
        let x = para(&[0.3, -0.2, 0.1, 0.7]);
        assert_eq!(VahlenMatrix::identity(3).automorphy_factor(&x, 0).unwrap(), Multivector::one(3));
        let en = Paravector::unit(3, 3);
        let f = VahlenMatrix::j(3).automorphy_factor(&en, 0).unwrap();
        assert_eq!(f, -&Multivector::e(3, 3));
    }

    #[test]
    fn vahlen_examples() {
        assert!(VahlenMatrix::j(3).is_sav());
        let two = VahlenMatrix::new(
            Multivector::one(3),
            Multivector::zero(3),
            Multivector::zero(3),
            Multivector::scalar(3, 2.0),
        );
        assert!(two.is_vahlen());
        assert!(!two.is_sav());
        let e1 = Multivector::e(3, 1);
        let d1 = VahlenMatrix::new(e1.clone(), Multivector::zero(3), Multivector::zero(3), e1.clone());
        // e_1·rev(e_1) = −1
        assert!(d1.is_vahlen());
        assert!(!d1.is_sav());
        let d2 = VahlenMatrix::new(e1.clone(), Multivector::zero(3), Multivector::zero(3), -&e1);
        assert!(d2.is_sav());
    }

    #[test]
    fn generator_lists() {
        assert_eq!(generators(3, 0).unwrap().len(), 2);
        let g = generators(3, 2).unwrap();
        assert_eq!(g.len(), 4);
        assert!(g.iter().all(|m| m.is_sav()));
        assert!(generators(3, 3).is_err());
    }

    #[test]
    fn congruence_examples() {
        assert!(VahlenMatrix::identity(3).in_congruence_subgroup(3).unwrap());
        let t = VahlenMatrix::translation(&Paravector::scalar(3, 3.0));
        assert!(t.in_congruence_subgroup(3).unwrap());
        assert!(!VahlenMatrix::j(3).in_congruence_subgroup(3).unwrap());
        let half = VahlenMatrix::translation(&Paravector::scalar(3, 0.5));
        assert_eq!(half.in_congruence_subgroup(3), Err(VahlenError::NonIntegral));
    }

    #[test]
    fn lattice_examples() {
        let l = Lattice::for_level(3, 2, 1.0).unwrap();
        assert_eq!(l.dual(), l);
        assert_eq!(l.period_cell(), vec![(0.0, 1.0); 3]);
        let l3 = Lattice::for_level(3, 2, 3.0).unwrap();
        let pr = l3.pairing(&l3.dual());
        for (i, row) in pr.iter().enumerate() {
            for (j, v) in row.iter().enumerate() {
                let t = if i == j { 1.0 } else { 0.0 };
                assert!((v - t).abs() < 1e-14);
            }
        }
    }

    #[test]
    fn unit_diagonals_found_for_small_p() {
        for p in 0..=2 {
            let u = unit_diagonals(p + 1, p);
            assert_eq!(u.len(), 2 << p, "p = {p}: {:?}", u.keys().collect::<Vec<_>>());
        }
    }

    #[test]
    fn identity_coset_present() {
        let c = enumerate_cosets(3, 2, 3, 1.0, Enumeration::Arithmetic).unwrap();
        assert_eq!(c.len(), 1);
        assert_eq!(c[0].key.d, Multivector::one(3));
        assert!(enumerate_cosets(3, 2, 3, 0.5, Enumeration::Arithmetic).unwrap().is_empty());
    }
}

//! Brute-force realization of the fermion plus NSR module through free fields.
//!
//! States live in the Fock space of an external fermion `f`, a boson `c` and a fermion `psi`.
//! The highest-weight vectors `|P,n>` of the embedded `Vir + Vir` are built explicitly and the
//! matrix elements of the NSR primary field between them are evaluated exactly.

use std::collections::HashMap;
use std::fmt;

use crate::kernel::{partitions_of, rat, solve, Flavor, HalfInt, KernelError, Partition, Scalar, StateVector};
use crate::nsr::{nsr_basis, ns_weight, Mode, NsrError, NsrModule, NsrParams, NsrVector, NsrWord};
use crate::virasoro::{q_squared, VirasoroError};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum OracleError {
    #[error("state of level {needed} exceeds the level cut {cut}")]
    InsufficientCutoff { needed: String, cut: String },
    #[error("momentum {0} is not generic: zero norm")]
    ZeroNorm(String),
    #[error("free-field images are degenerate at level {0}")]
    DegenerateFock(String),
    #[error(transparent)]
    Nsr(#[from] NsrError),
    #[error(transparent)]
    Virasoro(#[from] VirasoroError),
    #[error(transparent)]
    Kernel(#[from] KernelError),
}

type Result<T> = std::result::Result<T, OracleError>;

/// `f_{-r...} c_{-n...} psi_{-s...} |P>`: fermion lists strictly decreasing, boson list weakly decreasing.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Debug, Default)]
pub struct FockMonomial {
    pub f: Partition,
    pub c: Partition,
    pub psi: Partition,
}

impl FockMonomial {
    pub fn level(&self) -> HalfInt {
        self.f.weight() + self.c.weight() + self.psi.weight()
    }

    fn nsr_level(&self) -> HalfInt {
        self.c.weight() + self.psi.weight()
    }
}

pub type FockState = StateVector<FockMonomial>;

/// Which of the two free-field realizations: `Upper` uses `-P` in the linear terms.
#[derive(Copy, Clone, Debug, PartialEq, Eq)]
pub enum FieldSign {
    Upper,
    Lower,
}

/// Copy of the embedded Virasoro algebra.
#[derive(Copy, Clone, Debug, PartialEq, Eq)]
pub enum Copy12 {
    First,
    Second,
}

/// Free-field realization at momentum `P`.
#[derive(Clone, Debug)]
pub struct FreeField {
    b: Scalar,
    q: Scalar,
    p: Scalar,
    sign: FieldSign,
}

fn insert_fermion(list: &Partition, r: HalfInt) -> Option<(Partition, usize)> {
    let parts = list.parts();
    if parts.contains(&r) {
        return None;
    }
    let pos = parts.iter().take_while(|&&s| s > r).count();
    let mut v = parts.to_vec();
    v.insert(pos, r);
    Some((Partition::new(v), pos))
}

fn remove_fermion(list: &Partition, r: HalfInt) -> Option<(Partition, usize)> {
    let pos = list.parts().iter().position(|&s| s == r)?;
    let mut v = list.parts().to_vec();
    v.remove(pos);
    Some((Partition::new(v), pos))
}

fn parity_sign(k: usize) -> Scalar {
    if k % 2 == 0 {
        Scalar::one()
    } else {
        Scalar::int(-1)
    }
}

impl FreeField {
    pub fn new(b: &Scalar, p: &Scalar, sign: FieldSign) -> Result<Self> {
        let q = b + &b.inv()?;
        Ok(FreeField { b: b.clone(), q, p: p.clone(), sign })
    }

    pub fn momentum(&self) -> &Scalar {
        &self.p
    }

    fn signed_p(&self) -> Scalar {
        match self.sign {
            FieldSign::Upper => -&self.p,
            FieldSign::Lower => self.p.clone(),
        }
    }

    pub fn vacuum() -> FockState {
        FockState::basis(FockMonomial::default())
    }

    fn map_terms(state: &FockState, mut g: impl FnMut(&FockMonomial) -> Option<(FockMonomial, Scalar)>) -> FockState {
        let mut out = FockState::new();
        for (m, c) in state.iter() {
            if let Some((m2, k)) = g(m) {
                out.add_term(m2, c * &k);
            }
        }
        out
    }

    /// Boson mode `c_n`; `c_0` acts as the momentum.
    pub fn c(&self, n: i32, state: &FockState) -> FockState {
        if n == 0 {
            return state.scale(&self.p);
        }
        Self::map_terms(state, |m| {
            if n < 0 {
                let mut v = m.c.parts().to_vec();
                let pos = v.iter().take_while(|&&s| s.twice() >= -2 * n).count();
                v.insert(pos, HalfInt::int(-n));
                Some((FockMonomial { c: Partition::new(v), ..m.clone() }, Scalar::one()))
            } else {
                let mult = m.c.parts().iter().filter(|s| s.twice() == 2 * n).count();
                if mult == 0 {
                    return None;
                }
                let mut v = m.c.parts().to_vec();
                let pos = v.iter().position(|s| s.twice() == 2 * n)?;
                v.remove(pos);
                Some((FockMonomial { c: Partition::new(v), ..m.clone() }, Scalar::int((n as usize * mult) as i64)))
            }
        })
    }

    /// Free-field fermion `psi_r`, anticommuting with `f`.
    pub fn psi(&self, r: HalfInt, state: &FockState) -> FockState {
        Self::map_terms(state, |m| {
            let pass_f = m.f.len();
            let (list, pos) = if r.twice() < 0 { insert_fermion(&m.psi, -r)? } else { remove_fermion(&m.psi, r)? };
            Some((FockMonomial { psi: list, ..m.clone() }, parity_sign(pass_f + pos)))
        })
    }

    /// External fermion `f_r` with `{f_r, f_s} = delta_{r+s,0}`.
    pub fn f(&self, r: HalfInt, state: &FockState) -> FockState {
        Self::map_terms(state, |m| {
            let (list, pos) = if r.twice() < 0 { insert_fermion(&m.f, -r)? } else { remove_fermion(&m.f, r)? };
            Some((FockMonomial { f: list, ..m.clone() }, parity_sign(pos)))
        })
    }

    fn max_level(state: &FockState) -> i32 {
        state.iter().map(|(m, _)| m.level().twice()).max().unwrap_or(0)
    }

    /// NSR generator in the free-field realization.
    pub fn nsr(&self, mode: Mode, state: &FockState) -> FockState {
        let span = Self::max_level(state) / 2 + 3;
        let mut out = FockState::new();
        match mode {
            Mode::L(0) => {
                let delta = self.delta_ns();
                for (m, c) in state.iter() {
                    let h = Scalar::real(m.nsr_level().to_rational()) + &delta;
                    out.add_term(m.clone(), c * &h);
                }
            }
            Mode::L(n) => {
                let span = span + n.abs();
                for k in -span..=span {
                    if k == 0 || k == n {
                        continue;
                    }
                    let v = self.c(k, &self.c(n - k, state));
                    out.add_scaled(&v, &Scalar::frac(1, 2));
                }
                for t in (-2 * span - 1..=2 * span + 1).filter(|t| t % 2 != 0) {
                    let r = HalfInt::from_twice(t);
                    let v = self.psi(HalfInt::int(n) - r, &self.psi(r, state));
                    out.add_scaled(&v, &Scalar::frac((t - n) as i64, 4));
                }
                let lin = (self.q.scale(&rat(n as i64, 1)) + self.signed_p().scale(&rat(2, 1))) * Scalar::i().scale(&rat(1, 2));
                out.add_scaled(&self.c(n, state), &lin);
            }
            Mode::G(r) => {
                let span = span + r.twice().abs() / 2 + 1;
                for n in -span..=span {
                    if n == 0 {
                        continue;
                    }
                    let v = self.c(n, &self.psi(r - HalfInt::int(n), state));
                    out.add_scaled(&v, &Scalar::one());
                }
                let lin = (self.q.scale(&r.to_rational()) + self.signed_p()) * Scalar::i();
                out.add_scaled(&self.psi(r, state), &lin);
            }
        }
        out
    }

    pub fn delta_ns(&self) -> Scalar {
        (self.q.square().scale(&rat(1, 4)) - self.p.square()).scale(&rat(1, 2))
    }

    /// `L_n^{(eta)}` of the embedded `Vir + Vir`.
    pub fn vir12(&self, which: Copy12, n: i32, state: &FockState) -> Result<FockState> {
        let (x, y) = match which {
            Copy12::First => (self.b.inv()?, self.b.clone()),
            Copy12::Second => (self.b.clone(), self.b.inv()?),
        };
        let denom = (&x - &y).inv()?;
        let k_l = &x * &denom;
        let k_ff = -((&x + &y.scale(&rat(2, 1))) * &denom).scale(&rat(1, 2));
        let mut out = self.nsr(Mode::L(n), state).scale(&k_l);
        let span = Self::max_level(state) / 2 + n.abs() + 3;
        let mut ff = FockState::new();
        let mut fg = FockState::new();
        for t in (-2 * span - 1..=2 * span + 1).filter(|t| t % 2 != 0) {
            let r = HalfInt::from_twice(t);
            let s = HalfInt::int(n) - r;
            let weight = Scalar::frac(t as i64, 2);
            if n == 0 {
                if t > 0 {
                    ff.add_scaled(&self.f(-r, &self.f(r, state)), &weight.scale(&rat(2, 1)));
                }
            } else {
                ff.add_scaled(&self.f(s, &self.f(r, state)), &weight);
            }
            fg.add_scaled(&self.f(s, &self.nsr(Mode::G(r), state)), &Scalar::one());
        }
        out.add_scaled(&ff, &k_ff);
        out.add_scaled(&fg, &denom);
        Ok(out)
    }
}

/// Unnormalized `prod_{r=1/2}^{(4|n|-1)/2} chi_{-r} |P>` in the realization fixed by the sign of `n`.
pub fn chi_product(field: &FreeField, n: HalfInt) -> FockState {
    let mut state = FreeField::vacuum();
    let top = 2 * n.twice().abs() - 1;
    for t in (1..=top).rev().step_by(2) {
        let r = HalfInt::from_twice(-t);
        let mut next = field.f(r, &state);
        next.add_scaled(&field.psi(r, &state), &-Scalar::i());
        state = next;
    }
    state
}

/// `|P,n>` before normalization together with the measured `Omega_n^2`.
#[derive(Clone, Debug)]
pub struct PnVector {
    pub n: HalfInt,
    pub p: Scalar,
    pub state: FockState,
    pub omega_sq: Scalar,
    /// Decomposition into external-fermion monomials times NSR Verma vectors.
    pub components: Vec<(Partition, NsrVector)>,
}

/// Converts the NSR part of Fock states to the Verma basis `L_{-lambda}G_{-mu}|P>`.
pub struct VermaConverter {
    field: FreeField,
    module: NsrModule,
    levels: HashMap<HalfInt, (Vec<FockMonomial>, Vec<Vec<Scalar>>)>,
}

impl VermaConverter {
    pub fn new(field: FreeField, b: &Scalar) -> Result<Self> {
        let params = NsrParams::from_b_sq(b.square(), field.delta_ns())?;
        Ok(VermaConverter { module: NsrModule::new(&params), field, levels: HashMap::new() })
    }

    pub fn module(&mut self) -> &mut NsrModule {
        &mut self.module
    }

    /// Free-field image of a Verma basis word.
    pub fn image(&self, word: &NsrWord) -> FockState {
        let mut seq: Vec<Mode> = word.bos.parts().iter().map(|p| Mode::L(-(p.twice() / 2))).collect();
        seq.extend(word.fer.parts().iter().map(|&r| Mode::G(-r)));
        let mut state = FreeField::vacuum();
        for m in seq.into_iter().rev() {
            state = self.field.nsr(m, &state);
        }
        state
    }

    fn level_table(&mut self, level: HalfInt) -> &(Vec<FockMonomial>, Vec<Vec<Scalar>>) {
        if !self.levels.contains_key(&level) {
            let words = nsr_basis(level);
            let images: Vec<FockState> = words.iter().map(|w| self.image(w)).collect();
            let mut monos: Vec<FockMonomial> = Vec::new();
            for img in &images {
                for (m, _) in img.iter() {
                    if !monos.contains(m) {
                        monos.push(m.clone());
                    }
                }
            }
            monos.sort();
            let matrix: Vec<Vec<Scalar>> = monos.iter().map(|m| images.iter().map(|img| img.coeff(m)).collect()).collect();
            self.levels.insert(level, (monos, matrix));
        }
        &self.levels[&level]
    }

    /// Writes a pure `(c, psi)` state of a single level in the Verma basis.
    pub fn to_verma(&mut self, level: HalfInt, state: &FockState) -> Result<NsrVector> {
        let (monos, matrix) = self.level_table(level).clone();
        let words = nsr_basis(level);
        if monos.len() != words.len() {
            return Err(OracleError::DegenerateFock(level.to_string()));
        }
        for (m, _) in state.iter() {
            if !monos.contains(m) {
                return Err(OracleError::DegenerateFock(level.to_string()));
            }
        }
        let rhs: Vec<Scalar> = monos.iter().map(|m| state.coeff(m)).collect();
        let x = solve(&matrix, &rhs).map_err(|_| OracleError::DegenerateFock(level.to_string()))?;
        let mut v = NsrVector::new();
        for (w, c) in words.into_iter().zip(x) {
            v.add_term(w, c);
        }
        Ok(v)
    }

    /// Splits a Fock state by external-fermion content and converts each NSR part.
    pub fn decompose(&mut self, state: &FockState) -> Result<Vec<(Partition, NsrVector)>> {
        let mut groups: std::collections::BTreeMap<(Partition, HalfInt), FockState> = Default::default();
        for (m, c) in state.iter() {
            let key = (m.f.clone(), m.nsr_level());
            let inner = FockMonomial { f: Partition::default(), ..m.clone() };
            groups.entry(key).or_default().add_term(inner, c.clone());
        }
        let mut out: Vec<(Partition, NsrVector)> = Vec::new();
        for ((f, level), st) in groups {
            let v = self.to_verma(level, &st)?;
            match out.iter_mut().find(|(g, _)| *g == f) {
                Some((_, acc)) => acc.add_scaled(&v, &Scalar::one()),
                None => out.push((f, v)),
            }
        }
        Ok(out)
    }
}

fn field_for(b: &Scalar, p: &Scalar, n: HalfInt) -> Result<FreeField> {
    let sign = if n.twice() >= 0 { FieldSign::Upper } else { FieldSign::Lower };
    FreeField::new(b, p, sign)
}

/// `<A|A> = (-1)^k` for a monomial of `k` external fermions.
fn fermion_norm(f: &Partition) -> Scalar {
    parity_sign(f.len())
}

/// Builds `|P,n>` and measures `Omega_n^2` from `<P,n|P,n> = 1`.
pub fn build_pn(b: &Scalar, p: &Scalar, n: HalfInt) -> Result<PnVector> {
    let field = field_for(b, p, n)?;
    let state = chi_product(&field, n);
    let mut conv = VermaConverter::new(field, b)?;
    let components = conv.decompose(&state)?;
    let mut norm = Scalar::zero();
    for (f, v) in &components {
        let mut inner = Scalar::zero();
        for (w, c) in v.iter() {
            inner += &(conv.module().pairing(w, v) * c);
        }
        norm += &(fermion_norm(f) * inner);
    }
    if norm.is_zero() {
        return Err(OracleError::ZeroNorm(p.to_string()));
    }
    Ok(PnVector { n, p: p.clone(), state, omega_sq: norm.inv()?, components })
}

/// Outcome of the highest-weight replay of `|P,n>`.
#[derive(Clone, Debug, PartialEq)]
pub struct HighestWeightReport {
    pub pass: bool,
    pub eigenvalues: (Scalar, Scalar),
    pub expected: (Scalar, Scalar),
    pub first_failure: Option<(Copy12, i32)>,
}

/// `Delta^{(eta)}_n` from the shifted momenta `P^{(1)} + n b^{(1)}` and `P^{(2)} + n/b^{(2)}`.
pub fn expected_vir12_weights(b: &Scalar, p: &Scalar, n: HalfInt) -> Result<(Scalar, Scalar)> {
    let b_sq = b.square();
    let one = Scalar::one();
    let nn = Scalar::real(n.to_rational());
    let b1_sq = b_sq.scale(&rat(2, 1)).checked_div(&(&one - &b_sq))?;
    let p1_sq = p.square().checked_div(&(&one - &b_sq).scale(&rat(2, 1)))?;
    let p1b1 = (p * b).checked_div(&(&one - &b_sq))?;
    let d1 = q_squared(&b1_sq)?.scale(&rat(1, 4)) - p1_sq - (&p1b1 * &nn).scale(&rat(2, 1)) - &nn.square() * &b1_sq;
    let bi_sq = b_sq.inv()?;
    let b2_inv_sq = bi_sq.scale(&rat(2, 1)).checked_div(&(&one - &bi_sq))?;
    let p2_sq = p.square().checked_div(&(&one - &bi_sq).scale(&rat(2, 1)))?;
    let p2_over_b2 = (p * &b.inv()?).checked_div(&(&one - &bi_sq))?;
    let d2 = q_squared(&b2_inv_sq)?.scale(&rat(1, 4)) - p2_sq - (&p2_over_b2 * &nn).scale(&rat(2, 1)) - &nn.square() * &b2_inv_sq;
    Ok((d1, d2))
}

pub fn verify_highest_weight(b: &Scalar, p: &Scalar, n: HalfInt, k_max: i32) -> Result<HighestWeightReport> {
    let field = field_for(b, p, n)?;
    let state = chi_product(&field, n);
    let expected = expected_vir12_weights(b, p, n)?;
    let mut eig = Vec::new();
    let mut first_failure = None;
    for which in [Copy12::First, Copy12::Second] {
        let l0 = field.vir12(which, 0, &state)?;
        let (m, c) = state.iter().next().ok_or_else(|| OracleError::ZeroNorm(p.to_string()))?;
        let lambda = l0.coeff(m).checked_div(c)?;
        if l0 != state.scale(&lambda) && first_failure.is_none() {
            first_failure = Some((which, 0));
        }
        eig.push(lambda);
        for k in 1..=k_max {
            if !field.vir12(which, k, &state)?.is_zero() && first_failure.is_none() {
                first_failure = Some((which, k));
            }
        }
    }
    let eigenvalues = (eig[0].clone(), eig[1].clone());
    let pass = first_failure.is_none() && eigenvalues == expected;
    Ok(HighestWeightReport { pass, eigenvalues, expected, first_failure })
}

/// Matrix elements `<u|Phi_alpha(1)|v>` and `<u|Psi_alpha(1)|v>` between NSR Verma basis words.
pub struct VertexElements {
    bra: NsrModule,
    delta_bra: Scalar,
    delta_ket: Scalar,
    delta_alpha: Scalar,
    memo: HashMap<(bool, NsrWord, NsrWord), Scalar>,
}

fn head(word: &NsrWord) -> Option<(Mode, NsrWord)> {
    if let Some((h, rest)) = word.bos.split_first() {
        return Some((Mode::L(h.twice() / 2), NsrWord { bos: rest, fer: word.fer.clone() }));
    }
    word.fer.split_first().map(|(h, rest)| (Mode::G(h), NsrWord { bos: Partition::default(), fer: rest }))
}

impl VertexElements {
    /// Bra module at `Delta`, ket module at `Delta'`, field weight `Delta_alpha`.
    pub fn new(bra: &NsrParams, delta_ket: Scalar, delta_alpha: Scalar) -> Self {
        VertexElements {
            bra: NsrModule::new(bra),
            delta_bra: bra.delta().clone(),
            delta_ket,
            delta_alpha,
            memo: HashMap::new(),
        }
    }

    /// `odd = false` for `Phi`, `true` for `Psi`.
    pub fn element(&mut self, odd: bool, u: &NsrWord, v: &NsrWord) -> Scalar {
        let key = (odd, u.clone(), v.clone());
        if let Some(x) = self.memo.get(&key) {
            return x.clone();
        }
        let x = self.compute(odd, u, v);
        self.memo.insert(key, x.clone());
        x
    }

    fn weight_gap(&self, u: &NsrWord, v: &NsrWord) -> Scalar {
        &self.delta_bra + &Scalar::real(u.level().to_rational()) - &self.delta_ket - Scalar::real(v.level().to_rational())
    }

    fn element_vec(&mut self, odd: bool, u: &NsrVector, v: &NsrWord) -> Scalar {
        let mut acc = Scalar::zero();
        for (w, c) in u.iter() {
            acc += &(self.element(odd, w, v) * c);
        }
        acc
    }

    fn compute(&mut self, odd: bool, u: &NsrWord, v: &NsrWord) -> Scalar {
        let da = self.delta_alpha.clone();
        match head(v) {
            None => match head(u) {
                None => Scalar::one(),
                Some((Mode::L(k), rest)) => {
                    let gap = self.weight_gap(&rest, &NsrWord::default());
                    let shift = if odd { (&da + &Scalar::frac(1, 2)).scale(&rat(k as i64, 1)) } else { da.scale(&rat(k as i64, 1)) };
                    (gap + shift) * self.element(odd, &rest, v)
                }
                Some((Mode::G(r), rest)) => {
                    if odd {
                        let gap = self.weight_gap(&rest, &NsrWord::default());
                        (gap + da.scale(&rat(r.twice() as i64, 1))) * self.element(false, &rest, v)
                    } else {
                        self.element(true, &rest, v)
                    }
                }
            },
            Some((Mode::L(k), rest)) => {
                let lowered = self.bra.apply(Mode::L(k), u);
                let gap = self.weight_gap(u, &rest);
                let shift = if odd { (&da + &Scalar::frac(1, 2)).scale(&rat(k as i64, 1)) } else { da.scale(&rat(k as i64, 1)) };
                self.element_vec(odd, &lowered, &rest) - (gap - shift) * self.element(odd, u, &rest)
            }
            Some((Mode::G(r), rest)) => {
                let lowered = self.bra.apply(Mode::G(r), u);
                if odd {
                    let gap = self.weight_gap(u, &rest);
                    -self.element_vec(true, &lowered, &rest) + (gap - da.scale(&rat(r.twice() as i64, 1))) * self.element(false, u, &rest)
                } else {
                    self.element_vec(false, &lowered, &rest) - self.element(true, u, &rest)
                }
            }
        }
    }
}

/// `Delta_alpha = alpha(Q - alpha)/2`.
pub fn field_weight(b: &Scalar, alpha: &Scalar) -> Result<Scalar> {
    let q = b + &b.inv()?;
    Ok((alpha * &(q - alpha)).scale(&rat(1, 2)))
}

/// Unnormalized `<P,n|Phi_alpha(1)|P',n'>` and the two norms.
#[derive(Clone, Debug)]
pub struct OracleElement {
    pub raw: Scalar,
    pub norm_bra: Scalar,
    pub norm_ket: Scalar,
}

impl OracleElement {
    /// `l_{nn'}^2` with `<P,n|P,n> = <P',n'|P',n'> = 1`.
    pub fn l_squared(&self) -> Result<Scalar> {
        Ok(self.raw.square().checked_div(&(&self.norm_bra * &self.norm_ket))?)
    }
}

pub fn oracle_element(
    b: &Scalar,
    p: &Scalar,
    alpha: &Scalar,
    p_prime: &Scalar,
    n: HalfInt,
    n_prime: HalfInt,
    level_cut: HalfInt,
) -> Result<OracleElement> {
    for m in [n, n_prime] {
        let need = HalfInt::from_twice(m.twice() * m.twice());
        if need > level_cut {
            return Err(OracleError::InsufficientCutoff { needed: need.to_string(), cut: level_cut.to_string() });
        }
    }
    let bra = build_pn(b, p, n)?;
    let ket = build_pn(b, p_prime, n_prime)?;
    let b_sq = b.square();
    let bra_params = NsrParams::from_b_sq(b_sq.clone(), ns_weight(&b_sq, p)?)?;
    let mut vx = VertexElements::new(&bra_params, ns_weight(&b_sq, p_prime)?, field_weight(b, alpha)?);
    let mut raw = Scalar::zero();
    for (fa, va) in &bra.components {
        for (fb, vb) in &ket.components {
            if fa != fb {
                continue;
            }
            let mut inner = Scalar::zero();
            for (u, cu) in va.iter() {
                for (v, cv) in vb.iter() {
                    inner += &(vx.element(false, u, v) * cu * cv);
                }
            }
            raw += &(fermion_norm(fa) * inner);
        }
    }
    Ok(OracleElement { raw, norm_bra: bra.omega_sq.inv()?, norm_ket: ket.omega_sq.inv()? })
}

/// `l_{nn'}^2` computed by brute force.
pub fn oracle_l_squared(
    b: &Scalar,
    p: &Scalar,
    alpha: &Scalar,
    p_prime: &Scalar,
    n: HalfInt,
    n_prime: HalfInt,
    level_cut: HalfInt,
) -> Result<Scalar> {
    oracle_element(b, p, alpha, p_prime, n, n_prime, level_cut)?.l_squared()
}

/// All Fock monomials of total level `level`.
pub fn fock_monomials(level: HalfInt) -> Vec<FockMonomial> {
    let top = level.twice();
    let mut out = Vec::new();
    for tf in 0..=top {
        for tc in (0..=top - tf).step_by(2) {
            let tp = top - tf - tc;
            for f in partitions_of(HalfInt::from_twice(tf), Flavor::Fermionic) {
                for c in partitions_of(HalfInt::from_twice(tc), Flavor::Bosonic) {
                    for psi in partitions_of(HalfInt::from_twice(tp), Flavor::Fermionic) {
                        out.push(FockMonomial { f: f.clone(), c: c.clone(), psi });
                    }
                }
            }
        }
    }
    out
}

/// A generator acting on the Fock space.
#[derive(Copy, Clone, Debug, PartialEq, Eq)]
pub enum Generator {
    Nsr(Mode),
    F(HalfInt),
    Vir(Copy12, i32),
}

impl Generator {
    fn is_odd(self) -> bool {
        matches!(self, Generator::Nsr(Mode::G(_)) | Generator::F(_))
    }
}

impl fmt::Display for Generator {
    fn fmt(&self, out: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Generator::Nsr(Mode::L(n)) => write!(out, "L_{n}"),
            Generator::Nsr(Mode::G(r)) => write!(out, "G_{r}"),
            Generator::F(r) => write!(out, "f_{r}"),
            Generator::Vir(Copy12::First, n) => write!(out, "L1_{n}"),
            Generator::Vir(Copy12::Second, n) => write!(out, "L2_{n}"),
        }
    }
}

/// Outcome of replaying (anti)commutation relations on one state.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct RelationReport {
    pub checked: usize,
    pub failures: Vec<String>,
}

impl RelationReport {
    pub fn pass(&self) -> bool {
        self.failures.is_empty()
    }

    fn record(&mut self, name: String, lhs: &FockState, rhs: &FockState) {
        self.checked += 1;
        if lhs != rhs {
            self.failures.push(name);
        }
    }

    pub fn merge(&mut self, other: RelationReport) {
        self.checked += other.checked;
        self.failures.extend(other.failures);
    }
}

impl FreeField {
    pub fn act(&self, g: Generator, state: &FockState) -> Result<FockState> {
        Ok(match g {
            Generator::Nsr(m) => self.nsr(m, state),
            Generator::F(r) => self.f(r, state),
            Generator::Vir(which, n) => self.vir12(which, n, state)?,
        })
    }

    /// `[a, b]` or `{a, b}` on `state`, by parity.
    pub fn bracket(&self, a: Generator, b: Generator, state: &FockState) -> Result<FockState> {
        let mut out = self.act(a, &self.act(b, state)?)?;
        let sign = if a.is_odd() && b.is_odd() { Scalar::one() } else { Scalar::int(-1) };
        out.add_scaled(&self.act(b, &self.act(a, state)?)?, &sign);
        Ok(out)
    }

    /// `3/2 + 3 Q^2`.
    pub fn central_charge(&self) -> Scalar {
        Scalar::frac(3, 2) + self.q.square().scale(&rat(3, 1))
    }

    /// `1 + 6 Q_eta^2` with `b_1^2 = 2 b^2/(1 - b^2)` and `b_2^2 = (b^2 - 1)/2`.
    pub fn vir12_central_charges(&self) -> Result<(Scalar, Scalar)> {
        let x = self.b.square();
        let one = Scalar::one();
        let b1_sq = x.scale(&rat(2, 1)).checked_div(&(&one - &x))?;
        let b2_sq = (&x - &one).scale(&rat(1, 2));
        let c = |s: &Scalar| -> Result<Scalar> { Ok(Scalar::one() + q_squared(s)?.scale(&rat(6, 1))) };
        Ok((c(&b1_sq)?, c(&b2_sq)?))
    }
}

fn half_odd(max_mode: i32) -> impl Iterator<Item = HalfInt> + Clone {
    (-2 * max_mode + 1..=2 * max_mode - 1).step_by(2).map(HalfInt::from_twice)
}

fn delta_term(state: &FockState, cond: bool, k: &Scalar) -> FockState {
    if cond {
        state.scale(k)
    } else {
        FockState::new()
    }
}

/// Replays the NSR relations with central charge `3/2 + 3 Q^2`, `{f_r, f_s} = delta_{r+s,0}`
/// and the vanishing of the mixed brackets, for modes `|m|, |r| <= max_mode`.
pub fn replay_fnsr_relations(field: &FreeField, state: &FockState, max_mode: i32) -> Result<RelationReport> {
    use Generator::*;
    let c = field.central_charge();
    let mut rep = RelationReport::default();
    let ints = -max_mode..=max_mode;
    for m in ints.clone() {
        for n in ints.clone() {
            let lhs = field.bracket(Nsr(Mode::L(m)), Nsr(Mode::L(n)), state)?;
            let mut rhs = field.nsr(Mode::L(m + n), state).scale(&Scalar::int((m - n) as i64));
            let anomaly = c.scale(&rat((m * m * m - m) as i64, 12));
            rhs.add_scaled(&delta_term(state, m + n == 0, &anomaly), &Scalar::one());
            rep.record(format!("[L_{m}, L_{n}]"), &lhs, &rhs);
        }
        for r in half_odd(max_mode) {
            let lhs = field.bracket(Nsr(Mode::L(m)), Nsr(Mode::G(r)), state)?;
            let k = Scalar::real(rat(m as i64, 2) - r.to_rational());
            rep.record(format!("[L_{m}, G_{r}]"), &lhs, &field.nsr(Mode::G(HalfInt::int(m) + r), state).scale(&k));
            let lhs = field.bracket(Nsr(Mode::L(m)), F(r), state)?;
            rep.record(format!("[L_{m}, f_{r}]"), &lhs, &FockState::new());
        }
    }
    for r in half_odd(max_mode) {
        for s in half_odd(max_mode) {
            let sum = r + s;
            let lhs = field.bracket(Nsr(Mode::G(r)), Nsr(Mode::G(s)), state)?;
            let mut rhs = FockState::new();
            if sum.is_integer() {
                rhs = field.nsr(Mode::L(sum.twice() / 2), state).scale(&Scalar::int(2));
            }
            let anomaly = c.scale(&(r.to_rational() * r.to_rational() - rat(1, 4))).scale(&rat(1, 3));
            rhs.add_scaled(&delta_term(state, sum.twice() == 0, &anomaly), &Scalar::one());
            rep.record(format!("{{G_{r}, G_{s}}}"), &lhs, &rhs);
            let lhs = field.bracket(F(r), F(s), state)?;
            rep.record(format!("{{f_{r}, f_{s}}}"), &lhs, &delta_term(state, sum.twice() == 0, &Scalar::one()));
            let lhs = field.bracket(Nsr(Mode::G(r)), F(s), state)?;
            rep.record(format!("{{G_{r}, f_{s}}}"), &lhs, &FockState::new());
        }
    }
    Ok(rep)
}

/// Replays both Virasoro copies with their central charges and `[L^(1)_m, L^(2)_n] = 0`.
pub fn replay_vir12_relations(field: &FreeField, state: &FockState, max_mode: i32) -> Result<RelationReport> {
    let (c1, c2) = field.vir12_central_charges()?;
    let mut rep = RelationReport::default();
    let ints = -max_mode..=max_mode;
    for (which, c) in [(Copy12::First, &c1), (Copy12::Second, &c2)] {
        for m in ints.clone() {
            for n in ints.clone() {
                let (a, b) = (Generator::Vir(which, m), Generator::Vir(which, n));
                let lhs = field.bracket(a, b, state)?;
                let mut rhs = field.vir12(which, m + n, state)?.scale(&Scalar::int((m - n) as i64));
                let anomaly = c.scale(&rat((m * m * m - m) as i64, 12));
                rhs.add_scaled(&delta_term(state, m + n == 0, &anomaly), &Scalar::one());
                rep.record(format!("[{a}, {b}]"), &lhs, &rhs);
            }
        }
    }
    for m in ints.clone() {
        for n in ints.clone() {
            let (a, b) = (Generator::Vir(Copy12::First, m), Generator::Vir(Copy12::Second, n));
            rep.record(format!("[{a}, {b}]"), &field.bracket(a, b, state)?, &FockState::new());
        }
    }
    Ok(rep)
}

/// `b -> 1/b` exchanges the two copies and fixes the NSR generators.
pub fn replay_b_swap(field: &FreeField, state: &FockState, max_mode: i32) -> Result<RelationReport> {
    let dual = FreeField { b: field.b.inv()?, ..field.clone() };
    let mut rep = RelationReport::default();
    for m in -max_mode..=max_mode {
        let l = Generator::Nsr(Mode::L(m));
        rep.record(format!("{l} under b -> 1/b"), &field.act(l, state)?, &dual.act(l, state)?);
        for (x, y) in [(Copy12::First, Copy12::Second), (Copy12::Second, Copy12::First)] {
            let name = format!("{} -> {}", Generator::Vir(x, m), Generator::Vir(y, m));
            rep.record(name, &field.vir12(x, m, state)?, &dual.vir12(y, m, state)?);
        }
    }
    Ok(rep)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn b() -> Scalar {
        Scalar::int(2)
    }

    #[test]
    fn l0_on_vacuum() {
        let p = Scalar::frac(1, 3);
        let ff = FreeField::new(&b(), &p, FieldSign::Upper).unwrap();
        let v = ff.nsr(Mode::L(0), &FreeField::vacuum());
        assert_eq!(v, FreeField::vacuum().scale(&ff.delta_ns()));
        assert!(ff.nsr(Mode::G(HalfInt::HALF), &FreeField::vacuum()).is_zero());
    }

    #[test]
    fn g_anticommutator_on_psi() {
        let p = Scalar::frac(1, 3);
        let ff = FreeField::new(&b(), &p, FieldSign::Upper).unwrap();
        let s = ff.psi(HalfInt::from_twice(-1), &FreeField::vacuum());
        let h = HalfInt::HALF;
        let mut lhs = ff.nsr(Mode::G(h), &ff.nsr(Mode::G(-h), &s));
        lhs.add_scaled(&ff.nsr(Mode::G(-h), &ff.nsr(Mode::G(h), &s)), &Scalar::one());
        assert_eq!(lhs, ff.nsr(Mode::L(0), &s).scale(&Scalar::int(2)));
    }

    #[test]
    fn half_vector_sign() {
        let p = Scalar::frac(1, 3);
        let ff = FreeField::new(&b(), &p, FieldSign::Upper).unwrap();
        let g = ff.nsr(Mode::G(-HalfInt::HALF), &FreeField::vacuum());
        let q = b() + b().inv().unwrap();
        let expect = ff.psi(-HalfInt::HALF, &FreeField::vacuum()).scale(&(-Scalar::i() * (q.scale(&rat(1, 2)) + &p)));
        assert_eq!(g, expect);
    }

    #[test]
    fn omega_half_matches_display() {
        let p = Scalar::frac(1, 3);
        let pn = build_pn(&b(), &p, HalfInt::HALF).unwrap();
        let q = b() + b().inv().unwrap();
        let expect = -(q.scale(&rat(1, 2)) + &p).checked_div(&p.scale(&rat(2, 1))).unwrap();
        assert_eq!(pn.omega_sq, expect);
    }

    #[test]
    fn highest_weight_half() {
        let r = verify_highest_weight(&b(), &Scalar::frac(1, 3), HalfInt::HALF, 2).unwrap();
        assert!(r.pass, "{r:?}");
        let r0 = verify_highest_weight(&b(), &Scalar::frac(1, 3), HalfInt::ZERO, 2).unwrap();
        assert!(r0.pass, "{r0:?}");
    }

    #[test]
    fn zero_zero_is_one() {
        let e = oracle_element(&b(), &Scalar::frac(1, 3), &Scalar::frac(2, 7), &Scalar::frac(3, 5), HalfInt::ZERO, HalfInt::ZERO, HalfInt::int(2)).unwrap();
        assert_eq!(e.raw, Scalar::one());
    }

    #[test]
    fn zero_half_signed() {
        let pp = Scalar::frac(3, 5);
        let e = oracle_element(&b(), &Scalar::frac(1, 3), &Scalar::frac(2, 7), &pp, HalfInt::ZERO, HalfInt::HALF, HalfInt::int(2)).unwrap();
        let q = b() + b().inv().unwrap();
        assert_eq!(e.raw, Scalar::int(-2).checked_div(&(q + pp.scale(&rat(2, 1)))).unwrap());
    }
}

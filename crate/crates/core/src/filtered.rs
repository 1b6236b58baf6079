//! Filtered (parabolic) structures at a puncture, in exact rational arithmetic.
//!
//! Convention: `P_a` increases with `a`, the model filtration of a rank one
//! module with jump `b` is `P_a = z^{-[a-b]} O`, and jump weights are stored
//! as representatives in `(-1, 0]`.
//!
//! A filtration living on the cyclic cover `zeta -> zeta^L` of the disc
//! carries, for each jump, the Galois character of the frame section realizing
//! it. This is what makes descent well defined: the weight alone forgets
//! which downstairs class it came from.

use std::collections::BTreeMap;
use std::fmt;

use num_rational::Ratio;
use num_traits::Zero;

use crate::error::{Error, Result};

/// Exact rational number.
pub type Q = Ratio<i64>;

pub fn q(num: i64, den: i64) -> Q {
    Ratio::new(num, den)
}

/// Representative of `x` modulo 1 in `(-1, 0]`.
pub fn reduce_weight(x: Q) -> Q {
    x - x.ceil()
}

/// Jump of a filtration: weight in `(-1, 0]`, Galois character modulo the
/// cover order of the owning [`FilteredLocal`], and multiplicity.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Jump {
    pub weight: Q,
    pub character: u32,
    pub multiplicity: u32,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct FilteredLocal {
    rank: u32,
    cover_order: u32,
    jumps: Vec<Jump>,
    base_degree: Q,
}

impl FilteredLocal {
    /// Filtration on the base disc from `(weight, multiplicity)` pairs.
    /// Weights are reduced into `(-1, 0]`.
    pub fn new(jumps: &[(Q, u32)], base_degree: Q) -> Result<Self> {
        let tagged: Vec<Jump> = jumps
            .iter()
            .map(|&(w, m)| Jump { weight: w, character: 0, multiplicity: m })
            .collect();
        Self::equivariant(1, tagged, base_degree)
    }

    /// Filtration on the cover of order `cover_order`, with explicit characters.
    pub fn equivariant(cover_order: u32, jumps: Vec<Jump>, base_degree: Q) -> Result<Self> {
        if cover_order == 0 {
            return Err(Error::InvalidInput("cover order must be at least 1".into()));
        }
        if jumps.iter().any(|j| j.multiplicity == 0) {
            return Err(Error::InvalidInput("jump multiplicities must be positive".into()));
        }
        if jumps.iter().any(|j| j.character >= cover_order) {
            return Err(Error::InvalidInput("jump character out of range".into()));
        }
        let rank: u32 = jumps.iter().map(|j| j.multiplicity).sum();
        if rank == 0 {
            return Err(Error::InvalidInput("filtration must have positive rank".into()));
        }
        let mut merged: BTreeMap<(Q, u32), u32> = BTreeMap::new();
        for j in jumps {
            *merged.entry((reduce_weight(j.weight), j.character)).or_default() += j.multiplicity;
        }
        let jumps = merged
            .into_iter()
            .map(|((weight, character), multiplicity)| Jump { weight, character, multiplicity })
            .collect();
        Ok(Self { rank, cover_order, jumps, base_degree })
    }

    pub fn rank(&self) -> u32 {
        self.rank
    }

    pub fn cover_order(&self) -> u32 {
        self.cover_order
    }

    pub fn jumps(&self) -> &[Jump] {
        &self.jumps
    }

    pub fn base_degree(&self) -> Q {
        self.base_degree
    }

    /// Jump weights with multiplicities, characters forgotten.
    pub fn weights(&self) -> Vec<(Q, u32)> {
        let mut m: BTreeMap<Q, u32> = BTreeMap::new();
        for j in &self.jumps {
            *m.entry(j.weight).or_default() += j.multiplicity;
        }
        m.into_iter().collect()
    }

    /// `base_degree - sum a dim Gr_a`.
    pub fn degree(&self) -> Q {
        filtered_degree(std::slice::from_ref(self), self.base_degree)
    }
}

impl fmt::Display for FilteredLocal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "rank {} {{", self.rank)?;
        for (i, j) in self.jumps.iter().enumerate() {
            if i > 0 {
                write!(f, ", ")?;
            }
            write!(f, "{}", j.weight)?;
            if j.multiplicity > 1 {
                write!(f, " x{}", j.multiplicity)?;
            }
            if self.cover_order > 1 {
                write!(f, " [chi {} mod {}]", j.character, self.cover_order)?;
            }
        }
        write!(f, "}}")
    }
}

/// Pullback along `zeta -> zeta^l`.
///
/// A frame section of weight `b` pulls back to weight `l b`; it is then
/// multiplied by `zeta^{-j}`, `j = ceil(l b)`, to bring the weight into
/// `(-1, 0]`, which shifts its character by `j`.
pub fn pullback_filtration(f: &FilteredLocal, l: u32) -> Result<FilteredLocal> {
    if l == 0 {
        return Err(Error::InvalidInput("cover order must be at least 1".into()));
    }
    let big = f.cover_order as i64 * l as i64;
    let big_u32 = u32::try_from(big).map_err(|_| Error::InvalidInput("cover order overflow".into()))?;
    let lq = Q::from_integer(l as i64);
    let jumps = f
        .jumps
        .iter()
        .map(|jp| {
            let c0 = jp.weight * lq;
            let j = c0.ceil().to_integer();
            let chi = (l as i64 * jp.character as i64 + j).rem_euclid(big);
            Jump { weight: c0 - Q::from_integer(j), character: chi as u32, multiplicity: jp.multiplicity }
        })
        .collect();
    FilteredLocal::equivariant(big_u32, jumps, f.base_degree)
}

/// Descent along `zeta -> zeta^l` of a Galois-equivariant filtration.
pub fn descent_filtration(f: &FilteredLocal, l: u32) -> Result<FilteredLocal> {
    if l == 0 || f.cover_order % l != 0 {
        return Err(Error::NotEquivariant { order: l });
    }
    let big = f.cover_order as i64;
    // Recover the weights on the base disc, then pull back to the intermediate cover.
    let base_jumps: Vec<Jump> = f
        .jumps
        .iter()
        .map(|jp| {
            let chi = jp.character as i64;
            // The unique j = chi mod L with a + j in (-L, 0].
            let mut j = chi;
            while jp.weight + Q::from_integer(j) <= Q::from_integer(-big) {
                j += big;
            }
            while jp.weight + Q::from_integer(j) > Q::zero() {
                j -= big;
            }
            Jump { weight: (jp.weight + Q::from_integer(j)) / Q::from_integer(big), character: 0, multiplicity: jp.multiplicity }
        })
        .collect();
    let base = FilteredLocal::equivariant(1, base_jumps, f.base_degree)?;
    let remaining = f.cover_order / l;
    if remaining == 1 {
        Ok(base)
    } else {
        pullback_filtration(&base, remaining)
    }
}

/// Input of the canonical decomposable extension of an irreducible block.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct StarExtensionInput {
    /// Rank of the block, equal to the cover order.
    pub r: u32,
    /// Determinant jump weight.
    pub d: Q,
    /// Frame valuation; `b = -m + r d`.
    pub m: i64,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StarExtension {
    /// `b / r` modulo 1, in `(-1, 0]`.
    pub line_weight: Q,
    /// Rank `r`, jumps `b/r^2 - p/r` modulo 1.
    pub bundle: FilteredLocal,
}

pub fn star_extension(input: StarExtensionInput) -> Result<StarExtension> {
    let StarExtensionInput { r, d, m } = input;
    if r == 0 {
        return Err(Error::InvalidInput("rank must be positive".into()));
    }
    let ri = r as i64;
    let parity_ok = if ri % 2 == 1 {
        m.rem_euclid(ri) == 0
    } else {
        m.rem_euclid(ri) == ri / 2
    };
    if !parity_ok {
        return Err(Error::ParityViolation { r, m });
    }
    let rq = Q::from_integer(ri);
    let b = Q::from_integer(-m) + rq * d;
    let jumps: Vec<(Q, u32)> = (0..ri)
        .map(|p| (reduce_weight(b / (rq * rq) - Q::from_integer(p) / rq), 1))
        .collect();
    let sum: Q = jumps.iter().map(|(a, _)| *a).sum();
    // Choose the lattice so that the degree equals that of the determinant line.
    let bundle = FilteredLocal::new(&jumps, sum - reduce_weight(d))?;
    Ok(StarExtension { line_weight: reduce_weight(b / rq), bundle })
}

/// `r a - d` is an integer for every jump when `r` is odd, and a half-integer
/// that is not an integer when `r` is even.
pub fn parity_check(r: u32, d: Q, jumps: &[Q]) -> bool {
    let rq = Q::from_integer(r as i64);
    jumps.iter().all(|&a| {
        let x = rq * a - d;
        if r % 2 == 1 {
            x.is_integer()
        } else {
            !x.is_integer() && (x * Q::from_integer(2)).is_integer()
        }
    })
}

/// `base_degree - sum_punctures sum_{-1 < a <= 0} a dim Gr_a`.
pub fn filtered_degree(punctures: &[FilteredLocal], base_degree: Q) -> Q {
    punctures.iter().fold(base_degree, |acc, f| {
        acc - f
            .jumps
            .iter()
            .map(|j| j.weight * Q::from_integer(j.multiplicity as i64))
            .sum::<Q>()
    })
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RamifiedCoverSpec {
    pub cover_order: u32,
    /// Ramification indices at points away from the punctures.
    pub interior_ramification: Vec<u32>,
    /// Ramification index at each puncture.
    pub puncture_ramification: Vec<u32>,
}

impl RamifiedCoverSpec {
    pub fn validate(&self) -> Result<()> {
        if self.cover_order == 0
            || self.interior_ramification.iter().chain(&self.puncture_ramification).any(|&m| m == 0)
        {
            return Err(Error::InvalidInput("ramification indices must be at least 1".into()));
        }
        Ok(())
    }
}

/// `deg_f - (rank / 2) sum_interior (m(P) - 1)`.
pub fn pushforward_degree(f: &FilteredLocal, spec: &RamifiedCoverSpec, deg_f: Q) -> Result<Q> {
    spec.validate()?;
    let total: i64 = spec.interior_ramification.iter().map(|&m| m as i64 - 1).sum();
    Ok(deg_f - Q::new(f.rank as i64 * total, 2))
}

/// Rank one filtration with its jump at `k/2` modulo 1.
pub fn canonical_pairing_filtration(k: i64) -> FilteredLocal {
    FilteredLocal::new(&[(q(k, 2), 1)], Q::zero()).expect("rank one")
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, serde::Serialize)]
pub enum PoleCheck {
    NotHolomorphic,
    Degenerate,
    Nondegenerate,
}

impl fmt::Display for PoleCheck {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            PoleCheck::NotHolomorphic => "NotHolomorphic",
            PoleCheck::Degenerate => "Degenerate",
            PoleCheck::Nondegenerate => "Nondegenerate",
        };
        f.write_str(s)
    }
}

/// Classifies the trace pairing twisted by `zeta^{-k}` on the rank `r`
/// pushforward: holomorphic iff `k <= r-1`, perfect iff `k = r-1`.
pub fn pairing_pole_check(k: i64, r: u32) -> Result<PoleCheck> {
    if r == 0 {
        return Err(Error::InvalidInput("rank must be positive".into()));
    }
    let top = r as i64 - 1;
    Ok(match k.cmp(&top) {
        std::cmp::Ordering::Greater => PoleCheck::NotHolomorphic,
        std::cmp::Ordering::Equal => PoleCheck::Nondegenerate,
        std::cmp::Ordering::Less => PoleCheck::Degenerate,
    })
}

/// Parses `"n"` or `"n/d"` into an exact rational.
pub fn parse_fraction(text: &str) -> Result<Q> {
    let t = text.trim();
    let bad = || Error::InvalidInput(format!("malformed fraction '{text}'"));
    let (n, d) = match t.split_once('/') {
        Some((n, d)) => (n.trim().parse::<i64>().map_err(|_| bad())?, d.trim().parse::<i64>().map_err(|_| bad())?),
        None => (t.parse::<i64>().map_err(|_| bad())?, 1),
    };
    if d == 0 {
        return Err(bad());
    }
    Ok(Q::new(n, d))
}

/// Formats as `"n"` or `"n/d"`.
pub fn format_fraction(x: Q) -> String {
    if x.is_integer() {
        x.to_integer().to_string()
    } else {
        format!("{}/{}", x.numer(), x.denom())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn plain(ws: &[Q]) -> FilteredLocal {
        FilteredLocal::new(&ws.iter().map(|&w| (w, 1)).collect::<Vec<_>>(), Q::zero()).unwrap()
    }

    /// Lattice oracle for the pullback: on the cover, the `(-1, 0]` jumps are
    /// the weights `l b + k`, `k` integer, of the generators
    /// `zeta^{-k} phi^*(v)` that fall in `(-1, 0]`.
    fn pullback_oracle(b: Q, l: i64) -> Vec<Q> {
        let mut out = Vec::new();
        for k in -3 * l..=3 * l {
            let c = Q::from_integer(l) * b + Q::from_integer(k);
            if c > Q::from_integer(-1) && c <= Q::zero() {
                out.push(c);
            }
        }
        out
    }

    #[test]
    fn pullback_examples() {
        let p = pullback_filtration(&plain(&[Q::zero()]), 2).unwrap();
        assert_eq!(p.weights(), vec![(Q::zero(), 1)]);
        assert_eq!(p.weights().iter().map(|x| x.0).collect::<Vec<_>>(), pullback_oracle(Q::zero(), 2));

        let p = pullback_filtration(&plain(&[q(-1, 2)]), 2).unwrap();
        assert_eq!(p.weights(), vec![(Q::zero(), 1)]);
        assert_eq!(pullback_oracle(q(-1, 2), 2), vec![Q::zero()]);

        let f = plain(&[q(-1, 3), q(-5, 7)]);
        assert_eq!(pullback_filtration(&f, 1).unwrap(), f);
    }

    #[test]
    fn descent_examples() {
        let f = plain(&[Q::zero()]);
        assert_eq!(descent_filtration(&pullback_filtration(&f, 2).unwrap(), 2).unwrap(), f);
        let g = plain(&[q(-1, 3)]);
        assert_eq!(descent_filtration(&pullback_filtration(&g, 3).unwrap(), 3).unwrap(), g);
        assert_eq!(descent_filtration(&g, 1).unwrap(), g);
        assert!(matches!(descent_filtration(&g, 2), Err(Error::NotEquivariant { order: 2 })));
    }

    #[test]
    fn partial_descent_lands_on_the_intermediate_cover() {
        let f = plain(&[q(-2, 5), q(-1, 6)]);
        let up6 = pullback_filtration(&f, 6).unwrap();
        let up2 = pullback_filtration(&f, 2).unwrap();
        assert_eq!(descent_filtration(&up6, 3).unwrap(), up2);
        let up2_then_3 = pullback_filtration(&up2, 3).unwrap();
        assert_eq!(up2_then_3, up6);
    }

    /// Weights of the Galois-invariant sections `sum_g g^*(zeta^p v)` on the
    /// `r`-fold cover, where `v` spans the line of weight `b / r` in the
    /// `zeta`-adic normalization: each `zeta^p v` with `p = 0..r-1` descends
    /// to a section of weight `(b/r - p)/r` up to integers.
    fn invariant_section_weights(r: i64, b: Q) -> Vec<Q> {
        let rq = Q::from_integer(r);
        let mut w: Vec<Q> = (0..r).map(|p| reduce_weight((b / rq - Q::from_integer(p)) / rq)).collect();
        w.sort();
        w
    }

    #[test]
    fn star_extension_examples() {
        let s = star_extension(StarExtensionInput { r: 2, d: Q::zero(), m: 1 }).unwrap();
        assert_eq!(s.line_weight, q(-1, 2));
        let ws: Vec<Q> = s.bundle.weights().iter().map(|x| x.0).collect();
        assert_eq!(ws, vec![q(-3, 4), q(-1, 4)]);
        assert_eq!(ws, invariant_section_weights(2, Q::from_integer(-1)));
        assert_eq!(Q::from_integer(2) * q(-1, 4) - Q::zero(), q(-1, 2));
        assert!(parity_check(2, Q::zero(), &ws));

        let s = star_extension(StarExtensionInput { r: 3, d: Q::zero(), m: 0 }).unwrap();
        let ws: Vec<Q> = s.bundle.weights().iter().map(|x| x.0).collect();
        assert_eq!(ws, vec![q(-2, 3), q(-1, 3), Q::zero()]);
        assert_eq!(ws, invariant_section_weights(3, Q::zero()));

        assert!(matches!(
            star_extension(StarExtensionInput { r: 2, d: Q::zero(), m: 0 }),
            Err(Error::ParityViolation { r: 2, m: 0 })
        ));
        assert!(matches!(
            star_extension(StarExtensionInput { r: 3, d: Q::zero(), m: 1 }),
            Err(Error::ParityViolation { .. })
        ));
    }

    #[test]
    fn parity_examples() {
        assert!(parity_check(3, Q::zero(), &[Q::zero(), q(-1, 3), q(-2, 3)]));
        assert!(parity_check(2, Q::zero(), &[q(-1, 4), q(-3, 4)]));
        assert!(!parity_check(2, Q::zero(), &[Q::zero(), q(-1, 2)]));
    }

    #[test]
    fn degree_examples() {
        assert_eq!(filtered_degree(&[], Q::zero()), Q::zero());
        let f = plain(&[q(-1, 4), q(-3, 4)]);
        assert_eq!(filtered_degree(&[f], Q::from_integer(-1)), Q::zero());
        assert_eq!(filtered_degree(&[plain(&[Q::zero()])], Q::from_integer(5)), Q::from_integer(5));
        let s = star_extension(StarExtensionInput { r: 2, d: Q::zero(), m: 1 }).unwrap();
        assert_eq!(s.bundle.base_degree(), Q::from_integer(-1));
        assert_eq!(s.bundle.degree(), Q::zero());
    }

    /// Independent evaluation of the pushforward degree through the lattice
    /// degree of the pushforward and its parabolic weights.
    ///
    /// The pushforward of the lattice loses `(m - 1)/2` per unit of rank at
    /// every ramification point. At a puncture of index `m` a weight `a`
    /// becomes the `m` weights `(a - j)/m`, `j = 0..m-1`.
    fn pushforward_oracle(punctures: &[(FilteredLocal, u32)], interior: &[u32], base: Q) -> Q {
        let rank = punctures.first().map(|p| p.0.rank()).unwrap_or(1) as i64;
        let all_m = interior.iter().chain(punctures.iter().map(|p| &p.1));
        let lattice = base - all_m.map(|&m| Q::new(rank * (m as i64 - 1), 2)).sum::<Q>();
        let mut parabolic = Q::zero();
        for (f, m) in punctures {
            for (a, mult) in f.weights() {
                for j in 0..*m as i64 {
                    parabolic += (a - Q::from_integer(j)) / Q::from_integer(*m as i64) * Q::from_integer(mult as i64);
                }
            }
        }
        lattice - parabolic
    }

    #[test]
    fn pushforward_examples() {
        let f = plain(&[Q::zero()]);
        let spec = |interior: Vec<u32>| RamifiedCoverSpec { cover_order: 2, interior_ramification: interior, puncture_ramification: vec![] };
        assert_eq!(pushforward_degree(&f, &spec(vec![2]), Q::zero()).unwrap(), q(-1, 2));
        assert_eq!(pushforward_oracle(&[], &[2], Q::zero()), q(-1, 2));
        assert_eq!(pushforward_degree(&f, &spec(vec![]), q(3, 4)).unwrap(), q(3, 4));
        assert_eq!(pushforward_degree(&f, &spec(vec![3]), Q::zero()).unwrap(), Q::from_integer(-1));
        assert_eq!(pushforward_oracle(&[], &[3], Q::zero()), Q::from_integer(-1));
    }

    #[test]
    fn pushforward_matches_oracle_on_small_covers() {
        for r in 1..=4u32 {
            for m in 1..=4u32 {
                for interior in [vec![], vec![2], vec![m], vec![2, 3]] {
                    let f = FilteredLocal::new(
                        &(0..r).map(|i| (q(-(i as i64), (r + 1) as i64), 1)).collect::<Vec<_>>(),
                        Q::from_integer(2),
                    )
                    .unwrap();
                    let spec = RamifiedCoverSpec { cover_order: m, interior_ramification: interior.clone(), puncture_ramification: vec![m] };
                    let got = pushforward_degree(&f, &spec, f.degree()).unwrap();
                    assert_eq!(got, pushforward_oracle(&[(f.clone(), m)], &interior, f.base_degree()));
                }
            }
        }
    }

    #[test]
    fn canonical_pairing_examples() {
        assert_eq!(canonical_pairing_filtration(0).weights(), vec![(Q::zero(), 1)]);
        assert_eq!(canonical_pairing_filtration(1).weights(), vec![(q(-1, 2), 1)]);
        assert_eq!(canonical_pairing_filtration(-3).weights(), vec![(q(-1, 2), 1)]);
        // P_a (x) P_b -> P_{a+b}: the jump a0 pairs perfectly with itself
        // against the class of k.
        for k in -4..=4 {
            let a0 = canonical_pairing_filtration(k).weights()[0].0;
            assert!((a0 * Q::from_integer(2) - Q::from_integer(k)).is_integer());
        }
    }

    #[test]
    fn pole_check_examples() {
        assert_eq!(pairing_pole_check(1, 2).unwrap(), PoleCheck::Nondegenerate);
        assert_eq!(pairing_pole_check(2, 2).unwrap(), PoleCheck::NotHolomorphic);
        assert_eq!(pairing_pole_check(0, 2).unwrap(), PoleCheck::Degenerate);
    }

    #[test]
    fn fractions_round_trip() {
        assert_eq!(parse_fraction("-3/4").unwrap(), q(-3, 4));
        assert_eq!(parse_fraction(" 2 ").unwrap(), Q::from_integer(2));
        assert!(parse_fraction("1/0").is_err());
        assert_eq!(format_fraction(q(-6, 8)), "-3/4");
        assert_eq!(format_fraction(Q::from_integer(5)), "5");
    }

    fn arb_filtration() -> impl Strategy<Value = FilteredLocal> {
        prop::collection::vec((-60i64..=0, 1i64..=12, 1u32..=3), 1..5).prop_map(|v| {
            let jumps: Vec<(Q, u32)> = v.into_iter().map(|(n, d, m)| (q(n, d), m)).collect();
            FilteredLocal::new(&jumps, Q::zero()).unwrap()
        })
    }

    proptest! {
        #[test]
        fn descent_inverts_pullback(f in arb_filtration(), l in 1u32..=5) {
            let up = pullback_filtration(&f, l).unwrap();
            prop_assert_eq!(up.rank(), f.rank());
            prop_assert_eq!(descent_filtration(&up, l).unwrap(), f);
        }

        #[test]
        fn star_extensions_satisfy_parity(r in 1u32..=6, dn in -12i64..=12, dd in 1i64..=6, k in -4i64..=4) {
            let ri = r as i64;
            let m = if ri % 2 == 1 { k * ri } else { k * ri + ri / 2 };
            let d = q(dn, dd);
            let s = star_extension(StarExtensionInput { r, d, m }).unwrap();
            let ws: Vec<Q> = s.bundle.weights().iter().map(|x| x.0).collect();
            prop_assert!(parity_check(r, d, &ws));
            prop_assert!(s.bundle.weights().iter().all(|x| x.1 == 1));
            prop_assert_eq!(ws.len() as u32, r);
            prop_assert_eq!(s.bundle.degree(), -reduce_weight(d));
        }

        #[test]
        fn pushforward_is_additive_and_linear(
            f in arb_filtration(),
            a in prop::collection::vec(1u32..6, 0..4),
            b in prop::collection::vec(1u32..6, 0..4),
        ) {
            let deg = f.degree();
            let spec = |v: Vec<u32>| RamifiedCoverSpec { cover_order: 6, interior_ramification: v, puncture_ramification: vec![] };
            let both: Vec<u32> = a.iter().chain(&b).copied().collect();
            let da = pushforward_degree(&f, &spec(a.clone()), deg).unwrap() - deg;
            let db = pushforward_degree(&f, &spec(b.clone()), deg).unwrap() - deg;
            let dab = pushforward_degree(&f, &spec(both), deg).unwrap() - deg;
            prop_assert_eq!(dab, da + db);
            let one = FilteredLocal::new(&[(Q::zero(), 1)], Q::zero()).unwrap();
            let d1 = pushforward_degree(&one, &spec(a), Q::zero()).unwrap();
            prop_assert_eq!(da, d1 * Q::from_integer(f.rank() as i64));
        }
    }
}

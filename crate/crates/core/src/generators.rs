//! Fixture and adversarial instance constructions.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::network::{ActionSpec, NetworkInstance};
use crate::setrep::{Geometry, MultiRange, RuleSet, SetError, Symbol, Wildcard};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum GenError {
    #[error("invalid generator parameters: {0}")]
    Params(String),
    #[error(transparent)]
    Set(#[from] SetError),
}

const NODE: &str = "n0";

fn single_node(geometry: Geometry, table: Vec<(RuleSet, ActionSpec)>) -> NetworkInstance {
    NetworkInstance::new(geometry, vec![(NODE.to_string(), table)])
        .expect("generated single-node instance is valid")
}

/// The 8-element toy space: `r1=[0,4]`, `r2=[1,5]`, `r3=[2,6]`, `r4=[3,3]`.
pub fn fig2_rules() -> (Geometry, Vec<RuleSet>) {
    let g = Geometry::multirange(&[3]).expect("valid widths");
    let rules = ["[[0,4]]", "[[1,5]]", "[[2,6]]", "[[3,3]]"]
        .iter()
        .map(|t| g.parse(t).expect("fixture parses"))
        .collect();
    (g, rules)
}

/// The toy rules as one node dropping everything it matches.
pub fn gen_fig2() -> NetworkInstance {
    let (g, rules) = fig2_rules();
    single_node(
        g,
        rules.into_iter().map(|r| (r, ActionSpec::Drop)).collect(),
    )
}

/// `1^ℓ`, `1^{ℓ-i} 0 *^{i-1}` for `i = 1..ℓ`, then `*^ℓ`.
pub fn hsa_rule_sets(ell: usize) -> (Geometry, Vec<RuleSet>) {
    let g = Geometry::wildcard(ell).expect("ell >= 1");
    let mut sets = Vec::with_capacity(ell + 2);
    sets.push(Wildcard::from_symbols(&vec![Symbol::One; ell]));
    for i in 1..=ell {
        let mut s = vec![Symbol::One; ell - i];
        s.push(Symbol::Zero);
        s.extend(std::iter::repeat_n(Symbol::Star, i - 1));
        sets.push(Wildcard::from_symbols(&s));
    }
    sets.push(Wildcard::full(ell));
    (g, sets.into_iter().map(RuleSet::Wildcard).collect())
}

/// One node whose `ℓ+1` drop rules partition the header space, followed by a
/// catch-all rule forwarding to the node itself. Loop-free for every `ℓ`.
pub fn gen_hsa_hard(ell: usize) -> NetworkInstance {
    let (g, sets) = hsa_rule_sets(ell);
    let last = sets.len() - 1;
    let table = sets
        .into_iter()
        .enumerate()
        .map(|(i, s)| {
            let action = if i == last {
                ActionSpec::Forward(NODE.to_string())
            } else {
                ActionSpec::Drop
            };
            (s, action)
        })
        .collect();
    single_node(g, table)
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct VeriflowParams {
    /// Number of fields `d`.
    pub fields: usize,
    /// Breakpoints `a_1 < … < a_p`.
    pub breakpoints: Vec<u128>,
    /// Value `b > a_p`.
    pub b: u128,
    /// Uniform field width.
    pub width: u32,
}

impl VeriflowParams {
    /// Breakpoints `1..=p` and `b = p + 1`.
    pub fn standard(fields: usize, p: usize, width: u32) -> Self {
        VeriflowParams {
            fields,
            breakpoints: (1..=p as u128).collect(),
            b: p as u128 + 1,
            width,
        }
    }
}

/// Rules `H_{1..i-1} × [a_j,a_j] × [b,b]^{d-i}` (all dropping) followed by the
/// full space forwarding to the node itself: `n = dp + 1` rules.
pub fn gen_veriflow_hard(params: &VeriflowParams) -> Result<NetworkInstance, GenError> {
    let VeriflowParams {
        fields: d,
        breakpoints,
        b,
        width,
    } = params;
    if *d == 0 || breakpoints.is_empty() {
        return Err(GenError::Params("need d >= 1 and p >= 1".into()));
    }
    let increasing = breakpoints.windows(2).all(|w| w[0] < w[1]);
    if breakpoints[0] == 0 || !increasing || breakpoints[breakpoints.len() - 1] >= *b {
        return Err(GenError::Params(
            "breakpoints must satisfy 0 < a_1 < … < a_p < b".into(),
        ));
    }
    if *width == 0 || *width > 128 || (*width < 128 && *b >= 1u128 << width) {
        return Err(GenError::Params(format!(
            "b = {b} does not fit in {width} bits"
        )));
    }
    let g = Geometry::multirange(&vec![*width; *d])?;
    let Geometry::MultiRange { widths } = &g else {
        unreachable!()
    };
    let top = if *width == 128 {
        u128::MAX
    } else {
        (1u128 << width) - 1
    };
    let mut table = Vec::with_capacity(d * breakpoints.len() + 1);
    for i in 0..*d {
        for &a in breakpoints {
            let ranges = (0..*d)
                .map(|f| match f.cmp(&i) {
                    std::cmp::Ordering::Less => (0, top),
                    std::cmp::Ordering::Equal => (a, a),
                    std::cmp::Ordering::Greater => (*b, *b),
                })
                .collect();
            let s = MultiRange::new(widths.clone(), ranges)?;
            table.push((RuleSet::MultiRange(s), ActionSpec::Drop));
        }
    }
    table.push((g.full(), ActionSpec::Forward(NODE.to_string())));
    Ok(single_node(g, table))
}

/// Shape of randomly drawn rule sets.
#[derive(Debug, Clone, PartialEq)]
pub enum RandomFamily {
    /// Each letter is `*` with probability `star_density`, else a fair bit.
    Wildcard { bits: usize, star_density: f64 },
    /// Each field is a uniformly drawn interval, or the full field with
    /// probability `full_field`.
    MultiRange { widths: Vec<u32>, full_field: f64 },
}

impl RandomFamily {
    pub fn geometry(&self) -> Result<Geometry, GenError> {
        Ok(match self {
            RandomFamily::Wildcard { bits, .. } => Geometry::wildcard(*bits)?,
            RandomFamily::MultiRange { widths, .. } => Geometry::multirange(widths)?,
        })
    }
}

fn draw_set(rng: &mut ChaCha8Rng, g: &Geometry, family: &RandomFamily) -> RuleSet {
    match (family, g) {
        (RandomFamily::Wildcard { bits, star_density }, _) => {
            let symbols: Vec<Symbol> = (0..*bits)
                .map(|_| {
                    if rng.random_bool(*star_density) {
                        Symbol::Star
                    } else if rng.random_bool(0.5) {
                        Symbol::One
                    } else {
                        Symbol::Zero
                    }
                })
                .collect();
            RuleSet::Wildcard(Wildcard::from_symbols(&symbols))
        }
        (RandomFamily::MultiRange { full_field, .. }, Geometry::MultiRange { widths }) => {
            let ranges = widths
                .iter()
                .map(|&w| {
                    let top = if w == 128 {
                        u128::MAX
                    } else {
                        (1u128 << w) - 1
                    };
                    if rng.random_bool(*full_field) {
                        (0, top)
                    } else {
                        let x = rng.random_range(0..=top);
                        let y = rng.random_range(0..=top);
                        (x.min(y), x.max(y))
                    }
                })
                .collect();
            RuleSet::MultiRange(MultiRange::new(widths.clone(), ranges).expect("drawn in range"))
        }
        _ => unreachable!("family and geometry agree"),
    }
}

fn check_probability(p: f64) -> Result<(), GenError> {
    if (0.0..=1.0).contains(&p) {
        Ok(())
    } else {
        Err(GenError::Params(format!("probability {p} outside [0, 1]")))
    }
}

/// `n` random rule sets; deterministic for a fixed seed.
pub fn gen_random(seed: u64, n: usize, family: &RandomFamily) -> Result<Vec<RuleSet>, GenError> {
    let g = family.geometry()?;
    match family {
        RandomFamily::Wildcard { star_density, .. } => check_probability(*star_density)?,
        RandomFamily::MultiRange { full_field, .. } => check_probability(*full_field)?,
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    Ok((0..n).map(|_| draw_set(&mut rng, &g, family)).collect())
}

/// Random multi-node network over `n` random rule sets: every node's table
/// is a random selection of those sets with random actions, sometimes
/// closed by a catch-all forward.
pub fn gen_random_network(
    seed: u64,
    n: usize,
    nodes: usize,
    family: &RandomFamily,
) -> Result<NetworkInstance, GenError> {
    if nodes == 0 {
        return Err(GenError::Params("need at least one node".into()));
    }
    let g = family.geometry()?;
    let sets = gen_random(seed, n, family)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x9e37_79b9_7f4a_7c15);
    let ids: Vec<String> = (0..nodes).map(|i| format!("n{i}")).collect();
    let pick_action = |rng: &mut ChaCha8Rng| match rng.random_range(0..6) {
        0 => ActionSpec::Drop,
        1 => ActionSpec::Deliver,
        _ => ActionSpec::Forward(ids[rng.random_range(0..nodes)].clone()),
    };
    let mut tables = Vec::with_capacity(nodes);
    for id in &ids {
        let mut table = Vec::new();
        if !sets.is_empty() {
            let len = rng.random_range(1..=sets.len());
            for _ in 0..len {
                let s = sets[rng.random_range(0..sets.len())].clone();
                table.push((s, pick_action(&mut rng)));
            }
        }
        if rng.random_bool(0.5) {
            let target = ids[rng.random_range(0..nodes)].clone();
            table.push((g.full(), ActionSpec::Forward(target)));
        }
        tables.push((id.clone(), table));
    }
    Ok(NetworkInstance::new(g, tables).expect("generated network is valid"))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::atoms::{compute_uc, Algorithm};
    use num_bigint::BigUint;

    #[test]
    fn fig2_has_four_rules() {
        assert_eq!(fig2_rules().1.len(), 4);
        assert_eq!(gen_fig2().nodes()[0].rules.len(), 4);
    }

    #[test]
    fn hsa_predicates() {
        let net = gen_hsa_hard(4);
        let got: Vec<String> = net.nodes()[0]
            .rules
            .iter()
            .map(|r| r.predicate.to_string())
            .collect();
        assert_eq!(got, ["1111", "1110", "110*", "10**", "0***", "****"]);
    }

    #[test]
    fn hsa_drop_sets_partition_h() {
        for ell in [1, 2, 5, 17, 64, 130] {
            let (g, sets) = hsa_rule_sets(ell);
            let drops = &sets[..ell + 1];
            let total: BigUint = drops.iter().map(RuleSet::cardinality).sum();
            assert_eq!(total, g.space_size(), "ell = {ell}");
            for (i, a) in drops.iter().enumerate() {
                for b in &drops[i + 1..] {
                    assert!(!a.intersects(b));
                }
            }
        }
    }

    #[test]
    fn veriflow_sizes() {
        let net = gen_veriflow_hard(&VeriflowParams::standard(3, 10, 4)).unwrap();
        assert_eq!(net.nodes()[0].rules.len(), 31);
        let sets: Vec<RuleSet> = net.nodes()[0]
            .rules
            .iter()
            .map(|r| r.predicate.clone())
            .collect();
        let e = compute_uc(net.geometry(), &sets, Algorithm::Add).unwrap();
        assert_eq!(e.atom_count(), 31);
    }

    #[test]
    fn veriflow_rejects_bad_breakpoints() {
        let mut p = VeriflowParams::standard(2, 3, 3);
        p.breakpoints = vec![2, 1, 3];
        assert!(gen_veriflow_hard(&p).is_err());
        let mut p = VeriflowParams::standard(2, 3, 3);
        p.b = 3;
        assert!(gen_veriflow_hard(&p).is_err());
        assert!(gen_veriflow_hard(&VeriflowParams::standard(2, 8, 3)).is_err());
        let mut p = VeriflowParams::standard(2, 3, 3);
        p.breakpoints[0] = 0;
        assert!(gen_veriflow_hard(&p).is_err());
    }

    #[test]
    fn random_is_deterministic() {
        let fam = RandomFamily::Wildcard {
            bits: 12,
            star_density: 0.5,
        };
        assert_eq!(
            gen_random(7, 10, &fam).unwrap(),
            gen_random(7, 10, &fam).unwrap()
        );
        assert_ne!(
            gen_random(7, 10, &fam).unwrap(),
            gen_random(8, 10, &fam).unwrap()
        );
        let net_a = gen_random_network(3, 8, 3, &fam).unwrap();
        assert_eq!(net_a, gen_random_network(3, 8, 3, &fam).unwrap());
    }

    #[test]
    fn density_extremes() {
        let g = Geometry::wildcard(10).unwrap();
        let singles = gen_random(
            1,
            6,
            &RandomFamily::Wildcard {
                bits: 10,
                star_density: 0.0,
            },
        )
        .unwrap();
        assert!(singles.iter().all(RuleSet::is_singleton));
        let e = compute_uc(&g, &singles, Algorithm::Add).unwrap();
        assert!(e.atom_count() <= singles.len() + 1);

        let full = gen_random(
            1,
            6,
            &RandomFamily::Wildcard {
                bits: 10,
                star_density: 1.0,
            },
        )
        .unwrap();
        assert!(full.iter().all(|s| *s == g.full()));
        assert_eq!(
            compute_uc(&g, &full, Algorithm::Add).unwrap().atom_count(),
            1
        );
    }

    #[test]
    fn random_ranges_respect_widths() {
        let fam = RandomFamily::MultiRange {
            widths: vec![6, 6],
            full_field: 0.2,
        };
        let g = fam.geometry().unwrap();
        for s in gen_random(11, 50, &fam).unwrap() {
            assert!(g.admits(&s));
        }
        assert!(gen_random(
            1,
            1,
            &RandomFamily::Wildcard {
                bits: 4,
                star_density: 1.5
            }
        )
        .is_err());
    }
}

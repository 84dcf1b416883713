use std::collections::BTreeMap;

use rand::seq::SliceRandom;
use rand::SeedableRng;

use super::{SimError, SimRng};
use crate::model::*;

/// Explicit instance orders, per phase with an optional fallback.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct FixedOrder {
    pub default: Option<Vec<String>>,
    pub per_phase: BTreeMap<String, Vec<String>>,
}

#[derive(Debug, Clone)]
#[allow(clippy::large_enum_variant)]
pub enum OrderPolicy {
    Seeded(SimRng),
    Fixed(FixedOrder),
    /// All permutations; only meaningful for successor enumeration.
    Exhaustive,
}

impl OrderPolicy {
    pub fn seeded(seed: u64) -> OrderPolicy {
        OrderPolicy::Seeded(SimRng::seed_from_u64(seed))
    }

    /// Declaration order of the configuration.
    pub fn declaration() -> OrderPolicy {
        OrderPolicy::Fixed(FixedOrder::default())
    }

    /// Parses `seeded:N`, `exhaustive`, `fixed:a,b,c` or
    /// `fixed:Phase=a,b,c;Other=c,b,a` (an entry without `=` is the fallback).
    pub fn parse(spec: &str) -> Result<OrderPolicy, SimError> {
        if spec == "exhaustive" {
            return Ok(OrderPolicy::Exhaustive);
        }
        if spec == "declaration" {
            return Ok(OrderPolicy::declaration());
        }
        if let Some(n) = spec.strip_prefix("seeded:") {
            let seed = n
                .parse()
                .map_err(|_| SimError::BadOrder(format!("bad seed `{n}`")))?;
            return Ok(OrderPolicy::seeded(seed));
        }
        if let Some(rest) = spec.strip_prefix("fixed:") {
            let mut f = FixedOrder::default();
            for part in rest.split(';').filter(|p| !p.trim().is_empty()) {
                let (phase, list) = match part.split_once('=') {
                    Some((p, l)) => (Some(p.trim().to_string()), l),
                    None => (None, part),
                };
                let names: Vec<String> = list
                    .split(',')
                    .map(|s| s.trim().to_string())
                    .filter(|s| !s.is_empty())
                    .collect();
                match phase {
                    Some(p) => {
                        f.per_phase.insert(p, names);
                    }
                    None => f.default = Some(names),
                }
            }
            return Ok(OrderPolicy::Fixed(f));
        }
        Err(SimError::BadOrder(format!(
            "expected `seeded:N`, `fixed:...`, `declaration` or `exhaustive`, found `{spec}`"
        )))
    }

    /// Checks that every fixed order is a permutation of the configuration's instances.
    pub fn validate(&self, cfg: &Configuration) -> Result<(), SimError> {
        if let OrderPolicy::Fixed(f) = self {
            for names in f.default.iter().chain(f.per_phase.values()) {
                resolve(cfg, names)?;
            }
        }
        Ok(())
    }

    pub fn order(&mut self, cfg: &Configuration, phase: &str) -> Result<Vec<ObjId>, SimError> {
        match self {
            OrderPolicy::Seeded(rng) => {
                let mut ids: Vec<ObjId> = cfg.ids().collect();
                ids.shuffle(rng);
                Ok(ids)
            }
            OrderPolicy::Fixed(f) => match f.per_phase.get(phase).or(f.default.as_ref()) {
                Some(names) => resolve(cfg, names),
                None => Ok(cfg.ids().collect()),
            },
            OrderPolicy::Exhaustive => Err(SimError::BadOrder(
                "the exhaustive policy enumerates successors and cannot drive a single run".into(),
            )),
        }
    }
}

fn resolve(cfg: &Configuration, names: &[String]) -> Result<Vec<ObjId>, SimError> {
    let mut ids = Vec::new();
    for n in names {
        let o = cfg
            .lookup(n)
            .ok_or_else(|| SimError::BadOrder(format!("unknown instance `{n}`")))?;
        if ids.contains(&o) {
            return Err(SimError::BadOrder(format!("instance `{n}` listed twice")));
        }
        ids.push(o);
    }
    if ids.len() != cfg.total() {
        return Err(SimError::BadOrder(format!(
            "order lists {} of {} instances",
            ids.len(),
            cfg.total()
        )));
    }
    Ok(ids)
}

/// All permutations of `items` (Heap's algorithm order is not needed; lexicographic by index).
pub fn permutations<T: Clone>(items: &[T]) -> Vec<Vec<T>> {
    if items.len() <= 1 {
        return vec![items.to_vec()];
    }
    let mut out = Vec::new();
    for i in 0..items.len() {
        let mut rest = items.to_vec();
        let head = rest.remove(i);
        for mut p in permutations(&rest) {
            p.insert(0, head.clone());
            out.push(p);
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fixed_order_parses_per_phase() {
        let OrderPolicy::Fixed(f) = OrderPolicy::parse("fixed:Act=c1,s1;s1,c1").unwrap() else {
            panic!()
        };
        assert_eq!(f.per_phase["Act"], vec!["c1", "s1"]);
        assert_eq!(f.default, Some(vec!["s1".to_string(), "c1".to_string()]));
    }

    #[test]
    fn order_must_be_permutation() {
        let mut cfg = Configuration::default();
        cfg.add_instance("a", "C");
        cfg.add_instance("b", "C");
        assert!(OrderPolicy::parse("fixed:a")
            .unwrap()
            .validate(&cfg)
            .is_err());
        assert!(OrderPolicy::parse("fixed:a,a")
            .unwrap()
            .validate(&cfg)
            .is_err());
        assert!(OrderPolicy::parse("fixed:b,a")
            .unwrap()
            .validate(&cfg)
            .is_ok());
    }

    #[test]
    fn permutation_count() {
        assert_eq!(permutations(&[1, 2, 3, 4]).len(), 24);
    }
}

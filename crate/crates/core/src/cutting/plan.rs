//! Cut plans and subexperiment generation.

use std::collections::BTreeSet;

use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution;

use super::qpd::{cut_dress_gate, gamma, qpd_rzz, Dressing, QpdTerm};
use crate::circuit::{Circuit, GateOp};
use crate::error::{Error, Result};
use crate::rng::{self, streams};

pub const DEFAULT_CUT_CAP: usize = 8;
pub const TERMS_PER_CUT: usize = 6;

/// One cut gate with its dressing and decomposition.
#[derive(Debug, Clone, PartialEq)]
pub struct CutSite {
    pub index: usize,
    pub dressing: Dressing,
    pub terms: [QpdTerm; 6],
}

#[derive(Debug, Clone, PartialEq)]
pub struct CutPlan {
    base: Circuit,
    sites: Vec<CutSite>,
    cap: usize,
}

impl CutPlan {
    pub fn new(base: Circuit, cut_indices: &[usize]) -> Result<CutPlan> {
        let indices: BTreeSet<usize> = cut_indices.iter().copied().collect();
        let mut sites = Vec::with_capacity(indices.len());
        for index in indices {
            let op = base.ops().get(index).ok_or(Error::IndexOutOfRange { index, width: base.len() })?;
            let dressing = cut_dress_gate(op)?;
            let terms = qpd_rzz(dressing.theta);
            sites.push(CutSite { index, dressing, terms });
        }
        Ok(CutPlan { base, sites, cap: DEFAULT_CUT_CAP })
    }

    /// Cuts every two-qubit gate with exactly one qubit in `side_a`.
    pub fn for_partition(base: Circuit, side_a: &[usize]) -> Result<CutPlan> {
        for &q in side_a {
            if q >= base.width() {
                return Err(Error::IndexOutOfRange { index: q, width: base.width() });
            }
        }
        let crossing: Vec<usize> = base
            .ops()
            .iter()
            .enumerate()
            .filter(|(_, op)| op.qubits.len() == 2 && side_a.contains(&op.qubits[0]) != side_a.contains(&op.qubits[1]))
            .map(|(i, _)| i)
            .collect();
        CutPlan::new(base, &crossing)
    }

    pub fn with_cap(mut self, cap: usize) -> CutPlan {
        self.cap = cap;
        self
    }

    pub fn base(&self) -> &Circuit {
        &self.base
    }

    pub fn sites(&self) -> &[CutSite] {
        &self.sites
    }

    pub fn k(&self) -> usize {
        self.sites.len()
    }

    /// Product of per-cut overheads.
    pub fn gamma(&self) -> f64 {
        self.sites.iter().map(|s| gamma(s.dressing.theta)).product()
    }

    pub fn thetas(&self) -> Vec<f64> {
        self.sites.iter().map(|s| s.dressing.theta).collect()
    }

    pub fn num_assignments(&self) -> u64 {
        (TERMS_PER_CUT as u64).pow(self.k() as u32)
    }

    pub(crate) fn check_cap(&self) -> Result<()> {
        if self.k() > self.cap {
            return Err(Error::TooManyCuts { requested: self.k(), cap: self.cap });
        }
        Ok(())
    }

    /// Term index per cut; cut 0 is the least significant base-6 digit.
    pub fn assignment(&self, id: u64) -> Vec<usize> {
        let mut id = id;
        (0..self.k())
            .map(|_| {
                let t = (id % TERMS_PER_CUT as u64) as usize;
                id /= TERMS_PER_CUT as u64;
                t
            })
            .collect()
    }

    pub fn assignment_id(terms: &[usize]) -> u64 {
        terms.iter().rev().fold(0, |acc, &t| acc * TERMS_PER_CUT as u64 + t as u64)
    }

    pub fn coefficient(&self, terms: &[usize]) -> f64 {
        self.sites.iter().zip(terms).map(|(s, &t)| s.terms[t].coefficient).product()
    }

    /// The cut-free circuit for one term assignment. Cut `j` records its
    /// measurement in slot `j`.
    pub fn subexperiment(&self, terms: &[usize]) -> Result<Circuit> {
        if terms.len() != self.k() {
            return Err(Error::DimMismatch { expected: self.k(), got: terms.len() });
        }
        let mut ops: Vec<GateOp> = Vec::with_capacity(self.base.len() + 4 * self.k());
        let mut next = self.sites.iter().zip(terms).enumerate().peekable();
        for (i, op) in self.base.ops().iter().enumerate() {
            match next.peek() {
                Some((slot, (site, &t))) if site.index == i => {
                    let d = &site.dressing;
                    ops.extend(d.pre.iter().cloned());
                    ops.extend(site.terms[t].gates(d.a, d.b, *slot));
                    ops.extend(d.post.iter().cloned());
                    next.next();
                }
                _ => ops.push(op.clone()),
            }
        }
        let mut c = Circuit::from_ops(self.base.width(), ops)?;
        for p in self.base.params() {
            c.declare_param(p.clone());
        }
        Ok(c)
    }
}

/// All `6^k` subexperiments with their coefficients, ordered by assignment id.
pub fn enumerate_subexperiments(plan: &CutPlan) -> Result<Vec<(Circuit, f64)>> {
    plan.check_cap()?;
    (0..plan.num_assignments())
        .map(|id| {
            let terms = plan.assignment(id);
            Ok((plan.subexperiment(&terms)?, plan.coefficient(&terms)))
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SampledTerm {
    pub assignment: u64,
    pub sign: f64,
}

/// Draws assignments with probability `Π|c_i| / Γ`. Scaling each draw by
/// `sign·Γ/num_samples` gives an unbiased estimate of the full sum.
pub fn sample_subexperiment_terms(plan: &CutPlan, num_samples: usize, seed: u64) -> Result<Vec<SampledTerm>> {
    if num_samples == 0 {
        return Err(Error::BadRange("num_samples must be at least 1".into()));
    }
    let dists = plan
        .sites
        .iter()
        .map(|s| WeightedIndex::new(s.terms.iter().map(|t| t.coefficient.abs())))
        .collect::<std::result::Result<Vec<_>, _>>()
        .map_err(|e| Error::BadParameter { kind: "QPD", reason: e.to_string() })?;
    let mut r = rng::stream(seed, streams::QPD_SAMPLING);
    Ok((0..num_samples)
        .map(|_| {
            let terms: Vec<usize> = dists.iter().map(|d| d.sample(&mut r)).collect();
            SampledTerm {
                assignment: CutPlan::assignment_id(&terms),
                sign: plan.coefficient(&terms).signum(),
            }
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ghz() -> Circuit {
        Circuit::from_ops(2, [GateOp::h(0), GateOp::cnot(0, 1)]).unwrap()
    }

    #[test]
    fn no_cuts_gives_original_circuit() {
        let plan = CutPlan::new(ghz(), &[]).unwrap();
        let subs = enumerate_subexperiments(&plan).unwrap();
        assert_eq!(subs, vec![(ghz(), 1.0)]);
    }

    #[test]
    fn ghz_cut_splits_into_single_qubits() {
        let plan = CutPlan::new(ghz(), &[1]).unwrap();
        let subs = enumerate_subexperiments(&plan).unwrap();
        assert_eq!(subs.len(), 6);
        for (c, _) in &subs {
            assert_eq!(c.connected_components(), vec![vec![0], vec![1]]);
        }
        let total: f64 = subs.iter().map(|(_, w)| w).sum();
        assert!((total - 1.0).abs() < 1e-12);
    }

    #[test]
    fn partition_selects_crossing_gates() {
        let c = Circuit::from_ops(
            4,
            [GateOp::cnot(0, 1), GateOp::cnot(0, 2), GateOp::cz(1, 3), GateOp::rzz(3, 2, 0.4), GateOp::h(1)],
        )
        .unwrap();
        let plan = CutPlan::for_partition(c, &[0, 2]).unwrap();
        let idx: Vec<usize> = plan.sites().iter().map(|s| s.index).collect();
        assert_eq!(idx, vec![0, 3]);
    }

    #[test]
    fn cap_is_enforced() {
        let ops: Vec<GateOp> = (0..3).map(|_| GateOp::cz(0, 1)).collect();
        let plan = CutPlan::new(Circuit::from_ops(2, ops).unwrap(), &[0, 1, 2]).unwrap().with_cap(2);
        assert!(matches!(enumerate_subexperiments(&plan), Err(Error::TooManyCuts { requested: 3, cap: 2 })));
    }

    #[test]
    fn non_cuttable_index_is_rejected() {
        assert!(matches!(CutPlan::new(ghz(), &[0]), Err(Error::UncuttableGate(_))));
        assert!(CutPlan::new(ghz(), &[5]).is_err());
    }

    #[test]
    fn assignment_ids_roundtrip() {
        let ops: Vec<GateOp> = (0..3).map(|_| GateOp::cz(0, 1)).collect();
        let plan = CutPlan::new(Circuit::from_ops(2, ops).unwrap(), &[0, 1, 2]).unwrap();
        for id in 0..plan.num_assignments() {
            assert_eq!(CutPlan::assignment_id(&plan.assignment(id)), id);
        }
        assert_eq!(plan.assignment(1), vec![1, 0, 0]);
    }

    #[test]
    fn sampling_cz_terms_is_uniform() {
        let plan = CutPlan::new(Circuit::from_ops(2, [GateOp::cz(0, 1)]).unwrap(), &[0]).unwrap();
        let samples = sample_subexperiment_terms(&plan, 2000, 9).unwrap();
        for t in 0..6u64 {
            let f = samples.iter().filter(|s| s.assignment == t).count() as f64 / 2000.0;
            assert!((f - 1.0 / 6.0).abs() < 0.03, "term {t}: {f}");
        }
        for s in &samples {
            assert_eq!(s.sign, if s.assignment >= 4 { -1.0 } else { 1.0 });
        }
    }

    #[test]
    fn sampling_without_cuts() {
        let plan = CutPlan::new(ghz(), &[]).unwrap();
        let samples = sample_subexperiment_terms(&plan, 10, 0).unwrap();
        assert!(samples.iter().all(|s| s.assignment == 0 && s.sign == 1.0));
        assert!(sample_subexperiment_terms(&plan, 0, 0).is_err());
    }
}

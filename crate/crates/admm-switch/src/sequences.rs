//! Enumeration of block-update sequences certified convergent.
//!
//! A [`PairTable`] records which ordered subsystem pairs (i, j) admit a
//! single-pair Lyapunov certificate at a fixed τ; [`recursive_search`]
//! backtracks over sequences whose transitions stay inside the table, with
//! an optional joint solve over each accepted cycle to restore the coupling
//! the per-pair screen relaxes.

use serde::{Deserialize, Serialize};

use crate::certify::{self, CertMethod, CertOptions, CertifyError, RateCertificate};
use crate::lmi::{solve_feasibility_opts, FeasibilityResult, LmiProblem, VarKind};
use crate::system::SwitchedSystem;

/// How table entries relate to certificates.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TableMode {
    /// Each ordered pair solved with its own (P_i, P_j): a necessary-
    /// condition screen, since it decouples the P family across pairs.
    #[default]
    PerPairIndependent,
    /// Same screen for pruning, plus a joint solve (shared P variables over
    /// exactly the cycle's consecutive pairs) confirming every accepted
    /// sequence.
    JointOnCycle,
}

/// Legality predicate used while extending a partial sequence.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LegalityMode {
    /// Candidate j must pair with the immediate predecessor: Ψ_{S[r−1], j}.
    #[default]
    Consecutive,
    /// Candidate j must pair with every earlier element: Ψ_{S[i], j} for
    /// all i < r (the literal reading of the pseudocode's inner loop).
    AllPrevious,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RepetitionMode {
    /// Each subsystem appears exactly once (ADMM sweeps update each block
    /// once per iteration).
    #[default]
    PermutationOnly,
    /// Values may repeat, as in the unrestricted loop of the pseudocode.
    Allowed,
}

/// Boolean feasibility table over ordered subsystem pairs at a fixed τ.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct PairTable {
    pub n: usize,
    /// feasible[i][j] ⇔ the single-pair LMI for transition i → j holds.
    pub feasible: Vec<Vec<bool>>,
    pub tau: f64,
    pub mode: TableMode,
}

impl PairTable {
    /// Table from explicit entries (used by tests and synthetic searches).
    pub fn from_bools(feasible: Vec<Vec<bool>>, tau: f64) -> PairTable {
        let n = feasible.len();
        assert!(feasible.iter().all(|r| r.len() == n));
        PairTable {
            n,
            feasible,
            tau,
            mode: TableMode::PerPairIndependent,
        }
    }
}

/// Single-pair LMI: the (i,j) Theorem-1/2 block with its own P_i, P_j.
pub fn pair_feasible(
    sys: &SwitchedSystem,
    pair: (usize, usize),
    tau: f64,
    method: CertMethod,
    opts: &CertOptions,
) -> bool {
    let mut lp = LmiProblem::new();
    let dim = sys.dim();
    let p_i = lp.add_var("Pi", VarKind::SymmetricPd, dim);
    let p_j = if pair.0 == pair.1 {
        p_i
    } else {
        lp.add_var("Pj", VarKind::SymmetricPd, dim)
    };
    let gamma = lp.add_var("Gamma", VarKind::DiagonalNonneg, dim);
    let expr = match method {
        CertMethod::Thm2 => {
            let u1 = lp.add_var("U1", VarKind::Square, dim);
            let u2 = lp.add_var("U2", VarKind::Square, dim);
            let u3 = lp.add_var("U3", VarKind::Square, dim);
            certify::thm2_pair_block_for_table(
                &lp, sys, p_i, p_j, gamma, u1, u2, u3, pair, tau, opts.gamma,
            )
        }
        _ => certify::thm1_pair_block_for_table(&lp, sys, p_i, p_j, gamma, pair, tau, opts.gamma),
    };
    lp.add_constraint(format!("pair_{}_{}", pair.0 + 1, pair.1 + 1), expr);
    solve_feasibility_opts(&lp, &opts.solve).is_feasible()
}

/// Build the pair table by screening every ordered pair independently.
pub fn build_pair_table(
    sys: &SwitchedSystem,
    tau: f64,
    method: CertMethod,
    opts: &CertOptions,
    mode: TableMode,
) -> PairTable {
    let n = sys.n_subsystems();
    let feasible = (0..n)
        .map(|i| {
            (0..n)
                .map(|j| pair_feasible(sys, (i, j), tau, method, opts))
                .collect()
        })
        .collect();
    PairTable {
        n,
        feasible,
        tau,
        mode,
    }
}

/// Joint certificate for one cyclic sequence: shared P variables, one
/// Theorem-1 constraint per consecutive pair plus the wrap-around.
pub fn joint_cycle_certificate(
    sys: &SwitchedSystem,
    seq: &[usize],
    tau: f64,
    opts: &CertOptions,
) -> Result<RateCertificate, CertifyError> {
    let mut lp = LmiProblem::new();
    let dim = sys.dim();
    let n_sub = sys.n_subsystems();
    let p: Vec<_> = (0..n_sub)
        .map(|i| lp.add_var(format!("P{}", i + 1), VarKind::SymmetricPd, dim))
        .collect();
    let gamma = lp.add_var("Gamma", VarKind::DiagonalNonneg, dim);
    let mut pairs: Vec<(usize, usize)> = seq.windows(2).map(|w| (w[0], w[1])).collect();
    pairs.push((seq[seq.len() - 1], seq[0]));
    pairs.sort_unstable();
    pairs.dedup();
    for pr in &pairs {
        let e = certify::thm1_pair_block_for_table(
            &lp, sys, p[pr.0], p[pr.1], gamma, *pr, tau, opts.gamma,
        );
        lp.add_constraint(format!("joint_{}_{}", pr.0 + 1, pr.1 + 1), e);
    }
    match solve_feasibility_opts(&lp, &opts.solve) {
        FeasibilityResult::Feasible { assignment, margin } => {
            let p_family: Vec<_> = (0..n_sub).map(|i| assignment.mats[i].clone()).collect();
            let chi = certify::chi_from_family(&p_family);
            Ok(RateCertificate {
                tau,
                method: CertMethod::Thm1,
                p_family,
                gamma: Some(assignment.mats[n_sub].diagonal()),
                aux: Vec::new(),
                margin,
                chi,
                pair_set: certify::PairSet::CyclicOnly,
                gamma_convention: opts.gamma,
            })
        }
        FeasibilityResult::Infeasible { best_slack } => {
            Err(CertifyError::Infeasible { best_slack })
        }
        FeasibilityResult::NumericalFailure { reason } => Err(CertifyError::Numerical(reason)),
    }
}

/// Joint confirmation hook for [`recursive_search`].
pub type JointCheck<'a> = dyn Fn(&[usize]) -> bool + 'a;

/// Depth-first backtracking over sequences S[1..n] with values in 𝓘.
///
/// A partial assignment is extended by j when the legality predicate holds
/// against the table; a complete sequence is accepted when the wrap-around
/// transition (S[n], S[1]) is also feasible and, if a joint check is
/// supplied, when that confirms the cycle. Output is lexicographic.
pub fn recursive_search(
    table: &PairTable,
    legality: LegalityMode,
    repetition: RepetitionMode,
    joint_check: Option<&JointCheck<'_>>,
) -> Vec<Vec<usize>> {
    let n = table.n;
    let mut out = Vec::new();
    let mut seq: Vec<usize> = Vec::with_capacity(n);
    let mut used = vec![false; n];
    search(
        table,
        legality,
        repetition,
        joint_check,
        &mut seq,
        &mut used,
        &mut out,
    );
    out
}

fn search(
    table: &PairTable,
    legality: LegalityMode,
    repetition: RepetitionMode,
    joint_check: Option<&JointCheck<'_>>,
    seq: &mut Vec<usize>,
    used: &mut Vec<bool>,
    out: &mut Vec<Vec<usize>>,
) {
    let n = table.n;
    if seq.len() == n {
        if table.feasible[seq[n - 1]][seq[0]] && joint_check.map_or(true, |chk| chk(seq)) {
            out.push(seq.clone());
        }
        return;
    }
    for j in 0..n {
        if repetition == RepetitionMode::PermutationOnly && used[j] {
            continue;
        }
        let legal = match legality {
            LegalityMode::Consecutive => seq.last().map_or(true, |&prev| table.feasible[prev][j]),
            LegalityMode::AllPrevious => seq.iter().all(|&s| table.feasible[s][j]),
        };
        if !legal {
            continue;
        }
        seq.push(j);
        used[j] = true;
        search(table, legality, repetition, joint_check, seq, used, out);
        used[j] = false;
        seq.pop();
    }
}

/// Exhaustive reference enumeration with the same predicates; the search
/// must agree with this for small n.
pub fn brute_force_sequences(
    table: &PairTable,
    legality: LegalityMode,
    repetition: RepetitionMode,
) -> Vec<Vec<usize>> {
    let n = table.n;
    let mut out = Vec::new();
    let total = (n as u64).pow(n as u32);
    'cand: for code in 0..total {
        let mut c = code;
        let mut seq = vec![0usize; n];
        for slot in (0..n).rev() {
            seq[slot] = (c % n as u64) as usize;
            c /= n as u64;
        }
        if repetition == RepetitionMode::PermutationOnly {
            let mut seen = vec![false; n];
            for &s in &seq {
                if seen[s] {
                    continue 'cand;
                }
                seen[s] = true;
            }
        }
        for r in 1..n {
            let ok = match legality {
                LegalityMode::Consecutive => table.feasible[seq[r - 1]][seq[r]],
                LegalityMode::AllPrevious => (0..r).all(|i| table.feasible[seq[i]][seq[r]]),
            };
            if !ok {
                continue 'cand;
            }
        }
        if !table.feasible[seq[n - 1]][seq[0]] {
            continue;
        }
        out.push(seq);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn table(n: usize, edges: &[(usize, usize)], tau: f64) -> PairTable {
        let mut f = vec![vec![false; n]; n];
        for &(i, j) in edges {
            f[i][j] = true;
        }
        PairTable::from_bools(f, tau)
    }

    #[test]
    fn all_true_table_yields_every_sequence_with_repetition() {
        let f = vec![vec![true; 3]; 3];
        let t = PairTable::from_bools(f, 0.9);
        let got = recursive_search(&t, LegalityMode::Consecutive, RepetitionMode::Allowed, None);
        assert_eq!(got.len(), 27);
        let brute = brute_force_sequences(&t, LegalityMode::Consecutive, RepetitionMode::Allowed);
        assert_eq!(got, brute);
    }

    #[test]
    fn all_false_table_yields_nothing() {
        let t = table(3, &[], 0.9);
        assert!(
            recursive_search(&t, LegalityMode::Consecutive, RepetitionMode::Allowed, None)
                .is_empty()
        );
    }

    #[test]
    fn three_cycle_edges_give_rotations_only() {
        let t = table(3, &[(0, 1), (1, 2), (2, 0)], 0.9);
        let got = recursive_search(&t, LegalityMode::Consecutive, RepetitionMode::Allowed, None);
        assert_eq!(got, vec![vec![0, 1, 2], vec![1, 2, 0], vec![2, 0, 1]]);
        let brute = brute_force_sequences(&t, LegalityMode::Consecutive, RepetitionMode::Allowed);
        assert_eq!(got, brute);
    }

    #[test]
    fn joint_check_can_reject() {
        let f = vec![vec![true; 2]; 2];
        let t = PairTable::from_bools(f, 0.9);
        let reject_all: &JointCheck<'_> = &|_seq: &[usize]| false;
        assert!(recursive_search(
            &t,
            LegalityMode::Consecutive,
            RepetitionMode::PermutationOnly,
            Some(reject_all)
        )
        .is_empty());
    }

    #[test]
    fn matches_brute_force_on_random_tables() {
        let mut rng = crate::rng::SplitRng::new(5);
        for n in 2..=4usize {
            for _ in 0..40 {
                let f: Vec<Vec<bool>> = (0..n)
                    .map(|_| (0..n).map(|_| rng.uniform(0.0, 1.0) < 0.6).collect())
                    .collect();
                let t = PairTable::from_bools(f, 0.9);
                for legality in [LegalityMode::Consecutive, LegalityMode::AllPrevious] {
                    for rep in [RepetitionMode::PermutationOnly, RepetitionMode::Allowed] {
                        let got = recursive_search(&t, legality, rep, None);
                        let brute = brute_force_sequences(&t, legality, rep);
                        assert_eq!(got, brute, "n={n} legality={legality:?} rep={rep:?}");
                    }
                }
            }
        }
    }
}

//! Integral criteria for deficiency indices and self-adjointness, plus the
//! constructive procedures used in their proofs (cutoffs, regularised
//! potential bounds, asymptotic solution pairs).
//!
//! Every criterion is one-directional unless its registry entry says
//! otherwise: a sufficient condition that is not met yields `fails`
//! without any claim about the system.

mod asymptotic;
mod catalog;
mod cutoff;
mod improper;
mod regularize;
mod weight;

use std::collections::BTreeMap;

use rayon::prelude::*;
use serde::Serialize;

use crate::deficiency::DeficiencyOptions;
use crate::error::{HamsysError, Result};
use crate::system::{IntervalKind, Problem};

pub use asymptotic::{asymptotic_solutions_uv, AsymptoticOptions, AsymptoticPair, AsymptoticSample};
pub use cutoff::{construct_cutoff, CutoffFunction, CutoffProperties};
pub use improper::{
    classify_improper_integral, classify_table, truncated_integrals, Antiderivative, DivergenceClassification, IntegralPlan,
};
pub use regularize::{regularize_q, QInvariants, QRegularization};
pub use weight::{
    block_weight_c, estimate_chain, hamiltonian_eigenvalues, inverse_block_weight, inverse_weight, smallest_eigenvalue,
    weyl_weight_c, EstimateChain, ScalarFunction, SIGMA_SING,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum VerdictStatus {
    Holds,
    Fails,
    Inconclusive,
}

impl VerdictStatus {
    pub fn as_str(&self) -> &'static str {
        match self {
            VerdictStatus::Holds => "holds",
            VerdictStatus::Fails => "fails",
            VerdictStatus::Inconclusive => "inconclusive",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum CheckStatus {
    Pass,
    Fail,
    Unverified,
}

#[derive(Debug, Clone, Serialize)]
pub struct HypothesisCheck {
    pub name: String,
    pub status: CheckStatus,
    pub detail: String,
}

impl HypothesisCheck {
    pub fn new(name: impl Into<String>, status: CheckStatus, detail: impl Into<String>) -> HypothesisCheck {
        HypothesisCheck {
            name: name.into(),
            status,
            detail: detail.into(),
        }
    }

    pub fn from_bool(name: impl Into<String>, ok: bool, detail: impl Into<String>) -> HypothesisCheck {
        HypothesisCheck::new(name, if ok { CheckStatus::Pass } else { CheckStatus::Fail }, detail)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum ClaimScope {
    HalfLine,
    Line,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum ClaimQuantity {
    /// Formal indices `ñ±`.
    NTilde,
    /// Ordinary indices `N±`.
    Deficiency,
}

/// Machine-readable consequence of a verdict: `[lo, hi]` ranges for the
/// plus and minus indices, optionally excluding one pair.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct IndexClaim {
    pub scope: ClaimScope,
    pub quantity: ClaimQuantity,
    pub plus: [i64; 2],
    pub minus: [i64; 2],
    /// The two indices coincide.
    pub equal: bool,
    /// A pair `(plus, minus)` that is ruled out.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub excluded: Option<[i64; 2]>,
}

impl IndexClaim {
    pub fn exact(scope: ClaimScope, quantity: ClaimQuantity, plus: i64, minus: i64) -> IndexClaim {
        IndexClaim {
            scope,
            quantity,
            plus: [plus, plus],
            minus: [minus, minus],
            equal: plus == minus,
            excluded: None,
        }
    }

    pub fn range(scope: ClaimScope, plus: [i64; 2], minus: [i64; 2]) -> IndexClaim {
        IndexClaim {
            scope,
            quantity: ClaimQuantity::NTilde,
            plus,
            minus,
            equal: false,
            excluded: None,
        }
    }

    /// Ranges `[lo, hi]` with the pair `(hi, hi)` ruled out.
    pub fn not_both_maximal(scope: ClaimScope, plus: [i64; 2], minus: [i64; 2]) -> IndexClaim {
        IndexClaim {
            excluded: Some([plus[1], minus[1]]),
            ..IndexClaim::range(scope, plus, minus)
        }
    }

    /// Whether measured indices are consistent with the claim.
    pub fn admits(&self, plus: i64, minus: i64) -> bool {
        let inside = |r: [i64; 2], v: i64| r[0] <= v && v <= r[1];
        inside(self.plus, plus)
            && inside(self.minus, minus)
            && (!self.equal || plus == minus)
            && self.excluded != Some([plus, minus])
    }
}

/// An integral condition with its classification.
#[derive(Debug, Clone, Serialize)]
pub struct IntegralEvidence {
    pub label: String,
    pub classification: DivergenceClassification,
}

/// Summary of an alternative set of hypotheses that was tried.
#[derive(Debug, Clone, Serialize)]
pub struct RouteSummary {
    pub route: String,
    pub status: VerdictStatus,
    pub hypotheses: Vec<HypothesisCheck>,
}

#[derive(Debug, Clone, Serialize)]
pub struct CriterionVerdict {
    pub id: &'static str,
    pub title: &'static str,
    pub status: VerdictStatus,
    /// The criterion is a characterisation (both directions).
    pub equivalence: bool,
    /// Which set of hypotheses the verdict is based on.
    pub route: String,
    pub conclusion: String,
    pub claim: Option<IndexClaim>,
    pub hypotheses: Vec<HypothesisCheck>,
    pub integrals: Vec<IntegralEvidence>,
    pub constants: BTreeMap<String, f64>,
    pub other_routes: Vec<RouteSummary>,
    pub notes: Vec<String>,
}

/// Which problems a criterion applies to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Applicability {
    /// Any problem on the whole line.
    Line,
    /// Any problem on a half-line.
    HalfLine,
    /// Any problem on a half-line or the line.
    Singular,
    /// Block-structured systems (including Sturm–Liouville embeddings) on
    /// a half-line or the line.
    Block,
    /// Sturm–Liouville problems on a half-line or the line.
    SturmLiouville,
    /// Sturm–Liouville problems on a half-line.
    SturmLiouvilleHalfLine,
    /// Scalar Sturm–Liouville problems on a half-line.
    ScalarSturmLiouville,
}

#[derive(Debug, Clone, Serialize)]
pub struct CriterionInfo {
    pub id: &'static str,
    pub title: &'static str,
    pub equivalence: bool,
    pub applies_to: Applicability,
    pub hypotheses: &'static [&'static str],
    pub conclusion: &'static str,
}

const REGISTRY: &[CriterionInfo] = &[
    CriterionInfo {
        id: "line-self-adjoint",
        title: "Weyl-weight criterion for essential self-adjointness on the line",
        equivalence: false,
        applies_to: Applicability::Line,
        hypotheses: &[
            "the interval is the whole line",
            "∫ 1/c = ∞ towards +∞ and towards −∞, where c = ‖H^{-1/2} J H^{-1/2}‖ (c = ∞ where H is singular)",
        ],
        conclusion: "the minimal relation is essentially self-adjoint: N± = 0",
    },
    CriterionInfo {
        id: "line-smallest-eigenvalue",
        title: "Smallest-eigenvalue criterion for essential self-adjointness on the line",
        equivalence: false,
        applies_to: Applicability::Line,
        hypotheses: &[
            "the interval is the whole line",
            "J is constant",
            "∫ λ₁ = ∞ towards +∞ and towards −∞, where λ₁ is the smallest eigenvalue of H",
        ],
        conclusion: "the minimal relation is essentially self-adjoint: N± = 0",
    },
    CriterionInfo {
        id: "halfline-minimal",
        title: "Weyl-weight criterion for minimal indices on a half-line",
        equivalence: false,
        applies_to: Applicability::HalfLine,
        hypotheses: &["the interval is a half-line", "∫ 1/c = ∞ towards the singular end"],
        conclusion: "ñ± = N± = κ± (κ∓ on a left half-line), κ± = numbers of positive/negative eigenvalues of iJ(x0)",
    },
    CriterionInfo {
        id: "halfline-minimal-λ1",
        title: "Smallest-eigenvalue criterion for minimal indices on a half-line",
        equivalence: false,
        applies_to: Applicability::HalfLine,
        hypotheses: &["the interval is a half-line", "J is constant", "∫ λ₁ = ∞ towards the singular end"],
        conclusion: "ñ± = N± = κ± (κ∓ on a left half-line)",
    },
    CriterionInfo {
        id: "canonical-maximal",
        title: "Trace criterion for maximal indices of canonical systems",
        equivalence: true,
        applies_to: Applicability::HalfLine,
        hypotheses: &["the interval is a half-line", "J is constant and B = 0", "H is of positive type"],
        conclusion: "ñ± = n if and only if ∫ tr H < ∞; otherwise ñ± ≤ n − 1",
    },
    CriterionInfo {
        id: "quasiregular",
        title: "Trace characterisation of quasi-regularity",
        equivalence: true,
        applies_to: Applicability::HalfLine,
        hypotheses: &[
            "the interval is a half-line",
            "one of: (a) J constant, B = 0, H of positive type — condition ∫ tr H < ∞; \
             (b) definite, J constant, ∫ |x|‖B‖ < ∞ — condition ∫ tr H < ∞; \
             (c) definite — condition ∫ tr H̃ < ∞ with H̃ = Y(x,0)* H Y(x,0)",
        ],
        conclusion: "quasi-regular (hence ñ± = n) if and only if the trace condition holds",
    },
    CriterionInfo {
        id: "lower-bound-diagonal",
        title: "Lower bound from integrable diagonal entries",
        equivalence: false,
        applies_to: Applicability::HalfLine,
        hypotheses: &[
            "the interval is a half-line",
            "J constant, B = 0 and H of positive type (diagonal of H), or the system is definite (diagonal of H̃ = Y(x,0)* H Y(x,0))",
            "k ≥ 1 diagonal entries have a finite integral",
        ],
        conclusion: "ñ± ≥ max(κ±, k)",
    },
    CriterionInfo {
        id: "KRB-quasiregular",
        title: "Quasi-regularity from one spectral point and a trace bound",
        equivalence: false,
        applies_to: Applicability::HalfLine,
        hypotheses: &[
            "the interval is a half-line",
            "for λ0 ∈ {i, −i}: the L²(H) solutions at λ0 form an n-dimensional space",
            "inf_t sgn(Im λ0) ∫ tr(i J⁻¹ H) > −∞ over the half-line",
        ],
        conclusion: "quasi-regular: ñ± = n",
    },
    CriterionInfo {
        id: "intermediate-n-minus-1",
        title: "Indices n − 1 from one non-integrable diagonal entry",
        equivalence: false,
        applies_to: Applicability::HalfLine,
        hypotheses: &[
            "the interval is a half-line",
            "J constant, B = 0, H of positive type",
            "exactly one diagonal entry of H has an infinite integral, all others are integrable",
            "|∫ tr(i J⁻¹ H)| < ∞ (automatic when J⁻¹H is real)",
        ],
        conclusion: "ñ± = N± = n − 1",
    },
    CriterionInfo {
        id: "real-symmetry",
        title: "Equal indices for real coefficients",
        equivalence: false,
        applies_to: Applicability::HalfLine,
        hypotheses: &["the interval is a half-line", "the system is definite", "J⁻¹B and J⁻¹H are real"],
        conclusion: "ñ+ = ñ− = N+ = N−; quasi-regular when the L²(H) solutions at λ = i form an n-dimensional space",
    },
    CriterionInfo {
        id: "singular-hamiltonian",
        title: "Minimal indices for block systems with a potential bound",
        equivalence: false,
        applies_to: Applicability::Block,
        hypotheses: &[
            "block system with blocks (V, B, A, H), A ⪰ 0",
            "q ≥ 1 nondecreasing with V ≥ −qH (q = 1 when V ≥ 0)",
            "∫ 1/(c q^{1/2}) = ∞ towards every singular end, c = max(1, ‖A^{-1/2} J H^{-1/2}‖)",
        ],
        conclusion: "ñ± = N± = n for the 2n-system on a half-line; essentially self-adjoint on the line",
    },
    CriterionInfo {
        id: "operator-case",
        title: "Bounded J and uniformly positive H",
        equivalence: false,
        applies_to: Applicability::Singular,
        hypotheses: &["J is bounded", "H ≥ δ > 0 uniformly", "B is locally square integrable"],
        conclusion: "essentially self-adjoint on the line; ñ± = N± = κ± on a half-line",
    },
    CriterionInfo {
        id: "sl-titchmarsh",
        title: "Limit-point criterion for Sturm–Liouville equations",
        equivalence: false,
        applies_to: Applicability::SturmLiouville,
        hypotheses: &[
            "A > 0, H ⪰ 0",
            "q ≥ 1 nondecreasing with V = R − Q*AQ ≥ −qH (q = 1 when V ≥ 0)",
            "∫ 1/(c q^{1/2}) = ∞ towards every singular end, c = max(1, ‖A^{-1/2} H^{-1/2}‖)",
        ],
        conclusion: "ñ±(P) = N±(P) = n (limit-point case) on a half-line; essentially self-adjoint on the line",
    },
    CriterionInfo {
        id: "sl-two-term-maximal",
        title: "Maximal indices of the two-term equation −(A⁻¹u′)′ = λHu",
        equivalence: true,
        applies_to: Applicability::SturmLiouvilleHalfLine,
        hypotheses: &[
            "Q = 0 and R = 0",
            "A > 0",
            "H is nonsingular on a set of positive measure",
        ],
        conclusion: "ñ±(P) = 2n (quasi-regular) if and only if ∫ tr(ÃHÃ) < ∞ and ∫ tr H < ∞ \
                     (the second condition is implied when A ≥ ε > 0), Ã = ∫ A; \
                     otherwise max(n, k₁ + k₂) ≤ ñ±(P) ≤ 2n − 1 with k₁, k₂ the numbers of integrable diagonal entries of H and ÃHÃ",
    },
    CriterionInfo {
        id: "sl-perturbed-two-term",
        title: "Maximal indices of −(A⁻¹u′)′ + Ru = λHu with a decaying potential",
        equivalence: true,
        applies_to: Applicability::SturmLiouvilleHalfLine,
        hypotheses: &[
            "Q = 0, A > 0, H nonsingular on a set of positive measure",
            "∫ ‖Ã‖‖R‖ < ∞",
            "A(x) ∫ₓ^∞ R → 0 (not needed for scalar equations)",
        ],
        conclusion: "ñ±(P) = 2n (quasi-regular) if and only if ∫ tr(ÃHÃ) < ∞ and ∫ tr H < ∞; otherwise ñ±(P) ≤ 2n − 1",
    },
    CriterionInfo {
        id: "sl-constant-potential",
        title: "Maximal indices of −u″ + (k² + R₁)u = λHu",
        equivalence: true,
        applies_to: Applicability::SturmLiouvilleHalfLine,
        hypotheses: &[
            "A = I and Q = 0",
            "R = k²I + R₁ with k² ≠ 0 and ∫ ‖R₁‖ < ∞",
            "H is nonsingular on a set of positive measure",
        ],
        conclusion: "ñ±(P) = 2n (quasi-regular) if and only if ∫ tr H < ∞ (k² < 0) or ∫ e^{2kx} tr H < ∞ (k > 0); \
                     otherwise ñ±(P) ≤ 2n − 1",
    },
    CriterionInfo {
        id: "sl-intermediate",
        title: "Indices 2n − 1 of two-term equations",
        equivalence: false,
        applies_to: Applicability::SturmLiouvilleHalfLine,
        hypotheses: &[
            "Q = 0",
            "one of: (a) R = 0 and all but one of h_jj, (ÃHÃ)_jj are integrable; \
             (b) ∫ ‖Ã‖‖R‖ < ∞, A(x)∫ₓ^∞R → 0, and all but one of h_jj, (ÃHÃ)_jj are integrable; \
             (c) c₁ ≤ A ≤ c₂, ∫ x²‖R‖ < ∞ and ∫ (tr H)^{1/2} = ∞",
        ],
        conclusion: "(a): ñ±(P) = 2n − 1; (b), (c): ñ±(P) ≤ 2n − 1",
    },
    CriterionInfo {
        id: "sl-scalar",
        title: "Limit-point/limit-circle dichotomy for scalar equations",
        equivalence: true,
        applies_to: Applicability::ScalarSturmLiouville,
        hypotheses: &["scalar equation with Q = 0 and A > 0", "∫ |Ã||R| < ∞"],
        conclusion: "ñ±(P) = 2 if ∫ (Ã² + 1)H < ∞, and ñ±(P) = 1 otherwise",
    },
];

/// All registered criteria, in a stable order.
pub fn registry() -> &'static [CriterionInfo] {
    REGISTRY
}

pub fn info(id: &str) -> Result<&'static CriterionInfo> {
    REGISTRY.iter().find(|c| c.id == id).ok_or_else(|| HamsysError::UnknownId(id.to_string()))
}

/// Human-readable statement of a criterion.
pub fn explain(id: &str) -> Result<String> {
    let c = info(id)?;
    let mut s = format!("{} — {}\n", c.id, c.title);
    s.push_str(if c.equivalence {
        "characterisation (both directions)\n"
    } else {
        "sufficient condition only: a failed hypothesis says nothing about the system\n"
    });
    s.push_str("hypotheses:\n");
    for h in c.hypotheses {
        s.push_str(&format!("  - {h}\n"));
    }
    s.push_str(&format!("conclusion: {}\n", c.conclusion));
    Ok(s)
}

/// Whether a criterion can be evaluated on a problem.
pub fn applicable(c: &CriterionInfo, p: &Problem) -> bool {
    let kind = p.interval().kind;
    let half = matches!(kind, IntervalKind::HalfLinePositive | IntervalKind::HalfLineNegative);
    let singular = half || kind == IntervalKind::FullLine;
    let sl = matches!(p, Problem::SturmLiouville(_));
    match c.applies_to {
        Applicability::Line => kind == IntervalKind::FullLine,
        Applicability::HalfLine => half,
        Applicability::Singular => singular,
        Applicability::Block => singular && (sl || matches!(p, Problem::System(s) if s.block.is_some())),
        Applicability::SturmLiouville => singular && sl,
        Applicability::SturmLiouvilleHalfLine => half && sl,
        Applicability::ScalarSturmLiouville => half && matches!(p, Problem::SturmLiouville(s) if s.n == 1),
    }
}

/// Options shared by all criteria.
#[derive(Debug, Clone)]
pub struct CriteriaOptions {
    pub plan: IntegralPlan,
    pub deficiency: DeficiencyOptions,
    /// Points used for pointwise hypothesis checks on each side.
    pub grid_points: usize,
}

impl Default for CriteriaOptions {
    fn default() -> Self {
        CriteriaOptions {
            plan: IntegralPlan::default(),
            deficiency: DeficiencyOptions::default(),
            grid_points: 1000,
        }
    }
}

/// Evaluate one criterion.
pub fn evaluate_criterion(id: &str, p: &Problem, o: &CriteriaOptions) -> Result<CriterionVerdict> {
    let c = info(id)?;
    if !applicable(c, p) {
        return Err(HamsysError::Precondition(format!(
            "criterion {id} does not apply to this problem ({} on a {} interval)",
            match p {
                Problem::System(_) => "first-order system",
                Problem::SturmLiouville(_) => "Sturm–Liouville problem",
            },
            p.interval().kind.as_str()
        )));
    }
    catalog::evaluate(c, p, o, &catalog::Shared::default())
}

/// Evaluate every applicable criterion (concurrently); evaluation errors
/// become inconclusive verdicts.
pub fn evaluate_all(p: &Problem, o: &CriteriaOptions) -> Vec<CriterionVerdict> {
    let ids: Vec<&CriterionInfo> = REGISTRY.iter().filter(|c| applicable(c, p)).collect();
    let shared = catalog::Shared::default();
    ids.par_iter()
        .map(|c| catalog::evaluate(c, p, o, &shared).unwrap_or_else(|e| catalog::errored(c, &e)))
        .collect()
}

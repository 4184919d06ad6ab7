//! Safe allocation patterns.
//!
//! A rate is safe under an allocation when a trusted user controls one of its
//! impacting qubits, or when every impacted qubit is allocated and each of its
//! owners also controls an impacting qubit. Spreading the impacting qubits over
//! several untrusted users is not enough: those users may collude or be the
//! same actor.

use serde::{Deserialize, Serialize};

use crate::model::{Allocation, CrosstalkRate, Trust};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum SafetyReason {
    TrustedControlsImpacting,
    AllImpactedOwnersControlImpacting,
    UnsafeUnallocatedImpacted,
    UnsafeImpactedOwnerWithoutImpacting,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SafetyVerdict {
    pub safe: bool,
    pub reason: SafetyReason,
}

impl SafetyVerdict {
    fn of(reason: SafetyReason) -> Self {
        let safe = matches!(
            reason,
            SafetyReason::TrustedControlsImpacting | SafetyReason::AllImpactedOwnersControlImpacting
        );
        Self { safe, reason }
    }
}

pub fn is_safe(a: &Allocation, r: &CrosstalkRate) -> SafetyVerdict {
    let trusted_guard = a
        .components
        .iter()
        .any(|c| c.trust == Trust::Trusted && !c.qubits.is_disjoint(&r.impacting));
    if trusted_guard {
        return SafetyVerdict::of(SafetyReason::TrustedControlsImpacting);
    }
    if r.impacted.iter().any(|q| a.is_unallocated(*q)) {
        return SafetyVerdict::of(SafetyReason::UnsafeUnallocatedImpacted);
    }
    let all_guarded = a
        .owners_of(&r.impacted)
        .into_iter()
        .all(|i| !a.components[i].qubits.is_disjoint(&r.impacting));
    if all_guarded {
        SafetyVerdict::of(SafetyReason::AllImpactedOwnersControlImpacting)
    } else {
        SafetyVerdict::of(SafetyReason::UnsafeImpactedOwnerWithoutImpacting)
    }
}

/// Distinct users touching the rate's qubits; any unallocated involved qubit
/// counts as one more potential user.
pub fn involved_parties(a: &Allocation, r: &CrosstalkRate) -> usize {
    let involved = r.involved();
    let owners = a.owners_of(&involved).len();
    let open = involved.iter().any(|q| a.is_unallocated(*q));
    owners + usize::from(open)
}

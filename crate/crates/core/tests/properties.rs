mod common;

use common::*;
use ctxlab::tcf::TcfBackend;
use proptest::prelude::*;

proptest! {
    #[test]
    fn simulator_preserves_norm(raw in amplitudes(), circuit in prop::collection::vec(gate(), 0..12), seed in any::<u64>()) {
        norm_is_preserved(&raw, &circuit, seed)?;
    }

    #[test]
    fn context_observables_commute(circuit in prop::collection::vec(gate(), 0..8)) {
        contexts_commute(&circuit)?;
    }

    #[test]
    fn pauli_keys_compose_by_xor(raw in amplitudes(), k1 in key_bits(), k2 in key_bits()) {
        pauli_keys_compose(&raw, &k1, &k2)?;
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(6))]

    #[test]
    fn ideal_tcf_round_trips_exhaustively(s in any::<bool>(), seed in any::<u64>()) {
        tcf_round_trips(TcfBackend::Ideal, s, seed)?;
    }

    #[cfg(feature = "lwe")]
    #[test]
    fn lwe_tcf_round_trips_exhaustively(s in any::<bool>(), seed in any::<u64>()) {
        tcf_round_trips(TcfBackend::Lwe, s, seed)?;
    }
}

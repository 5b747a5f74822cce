use proptest::prelude::*;

use meminductor::netlist::{parse_netlist, validate_circuit, InductiveElement};

fn positive() -> impl Strategy<Value = f64> {
    prop_oneof![1e-12..1e-6f64, 1e-6..1.0f64, 1.0..1e6f64]
}

fn source() -> impl Strategy<Value = String> {
    prop_oneof![
        (-10.0..10.0f64).prop_map(|v| format!("{v:?}")),
        (-1.0..1.0f64, positive(), positive())
            .prop_map(|(o, a, f)| format!("SIN({o:?} {a:?} {f:?})")),
        (positive(), positive(), 1u32..9)
            .prop_map(|(d, w, n)| format!("PULSE(0 1 {d:?} {w:?} {:?} {n})", 2.0 * w)),
        (positive(), -5.0..5.0f64).prop_map(|(t, v)| format!("STEP(0 {v:?} {t:?})")),
        (positive(), positive()).prop_map(|(a, b)| format!("PWL(0 0 {a:?} 1 {:?} -1)", a + b)),
    ]
}

fn inductive() -> impl Strategy<Value = (String, String)> {
    prop_oneof![
        positive().prop_map(|l| ("L1".to_string(), format!("{l:?}"))),
        (positive(), 0.0..0.99f64)
            .prop_map(|(l, d)| ("ML1".to_string(), format!("MLSTAIR(l0={l:?}, delta={d:?})"))),
        (positive(), positive(), -0.999..0.999f64).prop_map(|(f, s, m)| {
            (
                "MX".to_string(),
                format!("MLCORE(flux_scale={f:?}, sw={s:?}, m0={m:?})"),
            )
        }),
    ]
}

proptest! {
    #[test]
    fn pretty_print_round_trips(
        src in source(),
        r in positive(),
        (lname, lval) in inductive(),
        c in positive(),
        flip_l in any::<bool>(),
        flip_c in any::<bool>(),
        stop in 1e-3..10.0f64,
    ) {
        let (la, lb) = if flip_l { ("b", "a") } else { ("a", "b") };
        let (ca, cb) = if flip_c { ("0", "b") } else { ("b", "0") };
        let text = format!(
            "V1 in 0 {src}\nR1 in a {r:?}\n{lname} {la} {lb} {lval}\nC1 {ca} {cb} {c:?}\n.tran {:?} {stop:?}\n.print v_out i\n.end\n",
            stop / 100.0
        );
        let doc = parse_netlist(&text).map_err(|e| TestCaseError::fail(format!("{e}\n{text}")))?;
        let printed = doc.to_string();
        let again = parse_netlist(&printed).map_err(|e| TestCaseError::fail(format!("{e}\n{printed}")))?;
        prop_assert!(doc.same_structure(&again), "{printed}");
        prop_assert_eq!(again.to_string(), printed);

        let circuit = validate_circuit(&again).map_err(|e| TestCaseError::fail(e.to_string()))?;
        prop_assert_eq!(circuit.inductive_orientation, if flip_l { -1.0 } else { 1.0 });
        prop_assert_eq!(circuit.capacitor_orientation, if flip_c { -1.0 } else { 1.0 });
        let is_core = matches!(circuit.inductive, InductiveElement::CoilCore(_));
        prop_assert_eq!(is_core, lname == "MX");
    }
}

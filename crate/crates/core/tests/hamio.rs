mod common;

use nqs::error::Error;
use nqs::hamio::{parse_fcidump, symmetry_images, MolecularIntegrals};
use proptest::prelude::*;

const HEADER: &str = " &FCI NORB=3,NELEC=2,MS2=0,\n  ORBSYM=1,1,1,\n  ISYM=1,\n &END\n";

#[test]
fn worked_examples() {
    let a = parse_fcidump("&FCI NORB=1,NELEC=2,MS2=0, &END\n0.5 0 0 0 0\n").unwrap();
    assert_eq!(a.e_nuc(), 0.5);
    assert_eq!(a.n_spatial(), 1);

    let b = parse_fcidump(&format!("{HEADER}0.7 1 1 0 0\n")).unwrap();
    assert_eq!(b.one_body(0, 0).unwrap(), 0.7);
    assert_eq!(b.one_body(0, 1).unwrap(), 0.0);

    let c = parse_fcidump(&format!("{HEADER}0.3 1 2 1 1\n")).unwrap();
    for (p, q, r, s) in [(0, 1, 0, 0), (1, 0, 0, 0), (0, 0, 0, 1), (0, 0, 1, 0)] {
        assert_eq!(c.two_body(p, q, r, s).unwrap(), 0.3);
    }
    assert_eq!(c.two_body(0, 0, 1, 1).unwrap(), 0.0);

    let d = parse_fcidump(&format!("{HEADER}0.7 1 2 0 0\n")).unwrap();
    assert_eq!(d.one_body(1, 0).unwrap(), 0.7);
}

#[test]
fn slash_terminator_accepted() {
    let a = parse_fcidump("&FCI NORB=2,NELEC=2,MS2=0\n/\n1.25 1 1 0 0\n").unwrap();
    assert_eq!(a.one_body(0, 0).unwrap(), 1.25);
}

#[test]
fn errors_carry_line_numbers() {
    match parse_fcidump("&FCI NELEC=2,MS2=0 &END\n") {
        Err(Error::Format { .. }) => {}
        other => panic!("missing NORB accepted: {other:?}"),
    }
    match parse_fcidump(&format!("{HEADER}0.1 1 1 0 0\n0.2 4 1 0 0\n")) {
        Err(Error::Format { line, .. }) => assert_eq!(line, 6),
        other => panic!("out-of-range index accepted: {other:?}"),
    }
    match parse_fcidump(&format!("{HEADER}abc 1 1 0 0\n")) {
        Err(Error::Format { line, .. }) => assert_eq!(line, 5),
        other => panic!("non-numeric value accepted: {other:?}"),
    }
}

#[test]
fn out_of_range_query_is_argument_error() {
    let a = parse_fcidump(&format!("{HEADER}0.7 1 1 0 0\n")).unwrap();
    assert!(matches!(a.one_body(3, 0), Err(Error::Argument(_))));
    assert!(matches!(a.two_body(0, 0, 0, 5), Err(Error::Argument(_))));
}

#[test]
fn missing_file_is_input_not_found() {
    assert!(matches!(MolecularIntegrals::read("/definitely/not/here.fcidump"), Err(Error::InputNotFound(_))));
}

#[test]
fn bundled_fixtures_round_trip() {
    for name in common::MOLECULES {
        let a = MolecularIntegrals::read(common::fixture(name)).unwrap();
        let b = parse_fcidump(&a.to_fcidump()).unwrap();
        assert_eq!(a, b, "{name}");
    }
}

fn integrals_from(n: usize, vals: &[f64]) -> MolecularIntegrals {
    let mut ints = MolecularIntegrals::zeros(n, 2, 0).unwrap();
    let mut it = vals.iter().cycle();
    ints.set_e_nuc(*it.next().unwrap());
    for p in 0..n {
        for q in 0..=p {
            ints.set_one_body(p, q, *it.next().unwrap()).unwrap();
        }
    }
    for p in 0..n {
        for q in 0..n {
            for r in 0..n {
                for s in 0..n {
                    let v = *it.next().unwrap();
                    if v.abs() > 0.5 {
                        ints.set_two_body(p, q, r, s, v).unwrap();
                    }
                }
            }
        }
    }
    ints
}

proptest! {
    #[test]
    fn round_trip(vals in prop::collection::vec(-2.0f64..2.0, 1..200), n in 1usize..5) {
        let a = integrals_from(n, &vals);
        let b = parse_fcidump(&a.to_fcidump()).unwrap();
        prop_assert_eq!(a, b);
    }

    #[test]
    fn symmetry_images_agree(vals in prop::collection::vec(-2.0f64..2.0, 1..200), n in 1usize..5, idx in prop::array::uniform4(0usize..4)) {
        let a = integrals_from(n, &vals);
        let [p, q, r, s] = idx.map(|i| i % n);
        let v = a.two_body(p, q, r, s).unwrap();
        for (w, x, y, z) in symmetry_images(p, q, r, s) {
            prop_assert_eq!(a.two_body(w, x, y, z).unwrap(), v);
        }
        prop_assert_eq!(a.one_body(p, q).unwrap(), a.one_body(q, p).unwrap());
    }

    #[test]
    fn record_order_is_irrelevant(vals in prop::collection::vec(-2.0f64..2.0, 1..120), n in 1usize..4, seed in any::<u64>()) {
        use rand::seq::SliceRandom;
        use rand::SeedableRng;
        let a = integrals_from(n, &vals);
        let text = a.to_fcidump();
        let end = text.find("&END").unwrap() + 4;
        let (head, body) = text.split_at(end);
        let mut lines: Vec<&str> = body.lines().filter(|l| !l.trim().is_empty()).collect();
        lines.shuffle(&mut rand_chacha::ChaCha8Rng::seed_from_u64(seed));
        let shuffled = format!("{head}\n{}\n", lines.join("\n"));
        prop_assert_eq!(parse_fcidump(&shuffled).unwrap(), a);
    }
}

use difftd::instance::InstanceFile;
use difftd::polyalg::RealMatrix;
use difftd::Error;
use proptest::prelude::*;

fn any_finite() -> impl Strategy<Value = f64> {
    prop_oneof![
        prop::num::f64::NORMAL | prop::num::f64::SUBNORMAL | prop::num::f64::ZERO,
        0.0f64..1.0,
    ]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn dense_round_trip_is_bitwise(n in 1usize..6, seed in prop::collection::vec(any_finite(), 42)) {
        let d_mu: Vec<f64> = (0..n).map(|i| seed[i]).collect();
        let p: Vec<f64> = (0..n * n).map(|i| seed[(i + 6) % seed.len()]).collect();
        let f = InstanceFile::Dense { d_mu, p_pi: RealMatrix::from_row_major(n, p).unwrap() };
        let g = InstanceFile::parse(&f.to_text()).unwrap();
        let (InstanceFile::Dense { d_mu: a, p_pi: pa }, InstanceFile::Dense { d_mu: b, p_pi: pb }) = (&f, &g) else {
            panic!("kind changed");
        };
        prop_assert!(a.iter().zip(b).all(|(x, y)| x.to_bits() == y.to_bits()));
        prop_assert!(pa.as_slice().iter().zip(pb.as_slice()).all(|(x, y)| x.to_bits() == y.to_bits()));
    }

    #[test]
    fn family_round_trip(m in 0usize..10_000) {
        let f = InstanceFile::Family { m };
        prop_assert_eq!(InstanceFile::parse(&f.to_text()).unwrap(), f);
    }
}

#[test]
fn save_and_load() {
    let dir = std::env::temp_dir().join(format!("difftd-instance-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let path = dir.join("x.txt");
    let f = InstanceFile::Dense {
        d_mu: vec![0.1 + 0.2, 0.7 - 1e-17],
        p_pi: RealMatrix::from_rows(&[vec![0.0, 1.0], vec![1.0, 0.0]]).unwrap(),
    };
    f.save(&path).unwrap();
    assert_eq!(InstanceFile::load(&path).unwrap(), f);
    std::fs::remove_dir_all(&dir).unwrap();
    assert!(matches!(InstanceFile::load(&path), Err(Error::Io(_))));
}

#[test]
fn comments_and_blank_lines_are_ignored() {
    let text = "# made by hand\ndifftd-instance 1\n\nkind dense\nn 1\nd_mu\n1\n# transition\np_pi\n1\n";
    let f = InstanceFile::parse(text).unwrap();
    assert!(f.instance().is_ok());
}

#[test]
fn bad_files_report_lines() {
    let cases = [
        ("difftd-instance 2\n", 1),
        ("difftd-instance 1\nkind sparse\n", 2),
        ("difftd-instance 1\nkind dense\nn two\n", 3),
        ("difftd-instance 1\nkind dense\nn 2\nd_mu\n0.5 0.5\np_pi\n1 0\n0 1 0\n", 8),
        ("difftd-instance 1\nkind family\nfamily example2\n", 3),
        ("difftd-instance 1\nkind family\nfamily example1\nm 23\nextra\n", 5),
    ];
    for (text, want) in cases {
        match InstanceFile::parse(text) {
            Err(Error::Parse { line, .. }) => assert_eq!(line, want, "{text:?}"),
            other => panic!("{text:?}: {other:?}"),
        }
    }
}

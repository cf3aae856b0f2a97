use geomvertex::grading::DegreeWindow;
use geomvertex::models::{build_model, FreeBosonModel, ModelName};

fn dims(name: &str) -> Vec<usize> {
    let va = build_model(name, DegreeWindow::new(0, 6).unwrap(), 7).unwrap();
    (0..=6).map(|k| va.basis().dim(k)).collect()
}

#[test]
fn graded_dimensions() {
    // partition numbers p(n), and partitions with no part below 2
    assert_eq!(dims("free_boson"), vec![1, 1, 2, 3, 5, 7, 11]);
    assert_eq!(dims("commutative"), vec![1, 1, 2, 3, 5, 7, 11]);
    assert_eq!(dims("commutative:2"), vec![1, 0, 1, 1, 2, 2, 4]);
    assert_eq!(dims("trivial"), vec![1, 0, 0, 0, 0, 0, 0]);
}

#[test]
fn labels_round_trip() {
    for name in ["trivial", "commutative", "commutative:3", "free_boson"] {
        let va = build_model(name, DegreeWindow::new(0, 6).unwrap(), 7).unwrap();
        for k in va.basis().keys() {
            assert_eq!(va.key(&va.label(k)).unwrap(), k, "{name}");
        }
    }
}

#[test]
fn boson_keys_carry_partition_size() {
    let va = build_model("free_boson", DegreeWindow::new(0, 6).unwrap(), 7).unwrap();
    let fb = FreeBosonModel::new();
    for k in va.basis().keys() {
        assert_eq!(fb.partition(k).iter().sum::<u32>() as i32, k.degree);
    }
}

#[test]
fn model_names() {
    assert_eq!(
        "free_boson".parse::<ModelName>().unwrap(),
        ModelName::FreeBoson
    );
    assert_eq!(
        "commutative:4".parse::<ModelName>().unwrap(),
        ModelName::Commutative { d: 4 }
    );
    for bad in ["", "boson", "commutative:0", "commutative:x"] {
        assert!(bad.parse::<ModelName>().is_err(), "{bad}");
    }
}

#[test]
fn boson_oracle_on_low_states() {
    // (Ta)_(k) = −k a_(k−1) gives (∂b)_(2) b = −2 b_(1) b
    let fb = FreeBosonModel::new();
    let w = DegreeWindow::new(0, 6).unwrap();
    let va = build_model("free_boson", w, 7).unwrap();
    assert_eq!(&fb.fock_mode_oracle(&[1], 1, &[1], w).unwrap(), va.vacuum());
    assert_eq!(
        fb.fock_mode_oracle(&[1], -1, &[1], w).unwrap(),
        va.state("b(-1,-1)").unwrap()
    );
    let expected = va.vacuum().scale(&geomvertex::scalar::GaussQ::int(-2));
    assert_eq!(fb.fock_mode_oracle(&[2], 2, &[1], w).unwrap(), expected);
}

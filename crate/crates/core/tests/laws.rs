use drscale::fitting::{fit_joint_law, fit_power_law, FitPoint, JointObservation};
use drscale::io::{fit_records, parse_records, Aspect, LawDocument, Variable};
use drscale::numeric::log_space;
use drscale::{JointLaw, PowerLaw};

fn joint_grid(law: &JointLaw) -> Vec<JointObservation> {
    let mut obs = Vec::new();
    for &m in &log_space(5e5, 8.7e7, 5) {
        for &d in &log_space(3e4, 4.8e5, 5) {
            obs.push(JointObservation::new(m, d, law.predict(m, d)).unwrap());
        }
    }
    obs
}

#[test]
fn adversarial_joint_law_round_trips() {
    let truth = JointLaw::new(6.94e5, 2.81e3, 1.14, 0.80, 0.07).unwrap();
    let rep = fit_joint_law(&joint_grid(&truth)).unwrap();
    let l = rep.law;
    for (got, want) in [
        (l.model_scale(), 6.94e5),
        (l.data_scale(), 2.81e3),
        (l.model_exponent(), 1.14),
        (l.data_exponent(), 0.80),
        (l.offset(), 0.07),
    ] {
        assert!((got - want).abs() / want < 0.05, "{got} vs {want}");
    }
    assert!(rep.r_squared >= 0.999);
}

#[test]
fn fitted_law_survives_a_document_round_trip() {
    let truth = PowerLaw::new(1.93e5, 0.51, 0.12).unwrap();
    let pts: Vec<FitPoint> = log_space(3e4, 4.8e5, 5)
        .into_iter()
        .map(|d| FitPoint::new(d, truth.predict(d)).unwrap())
        .collect();
    let rep = fit_power_law(&pts, None).unwrap();
    let doc = LawDocument::from_power_law(&rep.law, Variable::Data, Aspect::Robustness, Some(rep.r_squared), "synthetic").unwrap();
    let path = std::env::temp_dir().join(format!("drscale-law-{}.json", std::process::id()));
    doc.save(&path).unwrap();
    let (back, warnings) = LawDocument::load(&path).unwrap();
    std::fs::remove_file(&path).ok();
    assert!(warnings.is_empty());
    assert_eq!(back, doc);
    assert_eq!(back.power_law().unwrap(), rep.law);
}

#[test]
fn joint_fit_from_records_uses_every_cell() {
    let rob = JointLaw::new(2.11e3, 2.99e3, 0.10, 0.78, 0.01).unwrap();
    let eff = JointLaw::new(3.47e4, 2.14e3, 0.38, 1.10, 0.04).unwrap();
    let mut csv = String::from("strategy,model_size,data_size,ce_effectiveness,ce_ood,ce_adversarial\n");
    for &m in &log_space(5e5, 8.7e7, 5) {
        for &d in &log_space(3e4, 4.8e5, 5) {
            let (m, d) = (m.round(), d.round());
            let r = rob.predict(m, d);
            csv.push_str(&format!("standard,{m},{d},{},{r},{r}\n", eff.predict(m, d)));
        }
    }
    let recs = parse_records(csv.as_bytes()).unwrap();
    let doc = fit_records(&recs, Variable::Joint, Aspect::Effectiveness, Some("standard"), "grid").unwrap();
    let got = doc.joint_law().unwrap();
    assert!((got.model_exponent() - 0.38).abs() / 0.38 < 0.05);
    assert!((got.data_exponent() - 1.10).abs() / 1.10 < 0.05);
    assert!(doc.r_squared.unwrap() >= 0.999);
}

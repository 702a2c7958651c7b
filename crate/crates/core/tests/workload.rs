use nemo::bits::BitConfig;
use nemo::workload::{
    evaluate_report, load_workload, save_workload, PreparedWorkload, Quantizer, ReferenceArch, Split, TRAINING_TARGET,
};

#[test]
fn tiny_reference_trains_above_target() {
    for seed in 0..5 {
        let p = PreparedWorkload::reference(&ReferenceArch::tiny(), seed).unwrap();
        let all32 = BitConfig::uniform(32, p.workload.num_quantizers());
        let r = evaluate_report(&p.workload, &all32, &p.splits.validation, 1).unwrap();
        assert!(r.top1 >= TRAINING_TARGET, "seed {seed}: {}", r.top1);
    }
}

#[test]
fn tiny_shape() {
    let p = PreparedWorkload::reference(&ReferenceArch::tiny(), 0).unwrap();
    assert_eq!(p.workload.param_counts(), vec![144, 68]);
    assert_eq!(p.workload.num_quantizers(), 4);
    assert_eq!(p.graph().unwrap().num_nodes(), 4);
}

#[test]
fn small_has_sixteen_quantizers() {
    let p = PreparedWorkload::reference(&ReferenceArch::small(), 0).unwrap();
    assert_eq!(p.workload.num_quantizers(), 16);
}

#[test]
fn training_is_deterministic() {
    let a = PreparedWorkload::reference(&ReferenceArch::tiny(), 4).unwrap();
    let b = PreparedWorkload::reference(&ReferenceArch::tiny(), 4).unwrap();
    assert_eq!(a.workload, b.workload);
}

#[test]
fn wide_bits_track_float_accuracy() {
    let p = PreparedWorkload::reference(&ReferenceArch::tiny(), 1).unwrap();
    let data = p.splits.get(Split::Evaluation);
    let n = p.workload.num_quantizers();
    let float: Vec<usize> = (0..data.len())
        .map(|i| argmax(&p.workload.forward(data.sample(i))))
        .collect();
    let q32 = p.workload.quantized_forward(&BitConfig::uniform(32, n), data).unwrap();
    let agree = q32.iter().zip(&float).filter(|(s, c)| argmax(s) == **c).count();
    assert!(agree as f64 >= 0.99 * data.len() as f64, "{agree}/{}", data.len());

    let r2 = evaluate_report(&p.workload, &BitConfig::uniform(2, n), data, 1).unwrap();
    let r8 = evaluate_report(&p.workload, &BitConfig::uniform(8, n), data, 1).unwrap();
    assert!(r2.top1 <= r8.top1);
}

#[test]
fn save_load_round_trip() {
    let p = PreparedWorkload::reference(&ReferenceArch::tiny(), 2).unwrap();
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("w.json");
    save_workload(&p.workload, &path).unwrap();
    let back = load_workload(&path).unwrap();
    assert_eq!(back.layers(), p.workload.layers());
    let again = PreparedWorkload::from_workload(back).unwrap();
    assert_eq!(again.workload.calibration(), p.workload.calibration());
}

#[test]
fn quantizer_worked_example() {
    let q = Quantizer::new(2, -1.0, 1.0).unwrap();
    let (level, x) = q.quantize_dequantize(0.5);
    assert_eq!(level, 2);
    assert!((x - 1.0 / 3.0).abs() < 1e-12);
}

fn argmax(v: &[f64]) -> usize {
    let mut best = 0;
    for (i, x) in v.iter().enumerate() {
        if *x > v[best] {
            best = i;
        }
    }
    best
}

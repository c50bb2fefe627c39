use diachron::ensemble::neural_matrix;
use diachron::synth::{generate, stub_predictions, SynthSpec};
use diachron::{combine_matrix, detect_all, EnsembleConfig};

#[test]
fn ensemble_detects_at_least_what_regex_detects() {
    for seed in 0..10 {
        let corpus = generate(&SynthSpec::random(seed, 12, 20_000)).unwrap();
        let compiled = corpus.catalog.compile().unwrap();
        let regex = detect_all(&corpus.documents(), &compiled, corpus.spec.window).matrix;
        let preds = stub_predictions(&regex, seed + 100);
        let result = combine_matrix(&regex, &preds, &EnsembleConfig::default(), &corpus.catalog.categories()).unwrap();
        assert!(result.matrix.detection_count() >= regex.detection_count());
        let neural = neural_matrix(&regex, &preds).unwrap();
        for (f, row) in result.matrix.freq.iter().enumerate() {
            for (t, v) in row.iter().enumerate() {
                let (a, b) = (regex.freq[f][t], neural.freq[f][t]);
                assert!(a.min(b) <= *v && *v <= a.max(b));
            }
        }
    }
}

#[test]
fn cell_order_does_not_matter() {
    let corpus = generate(&SynthSpec::random(3, 8, 10_000)).unwrap();
    let compiled = corpus.catalog.compile().unwrap();
    let regex = detect_all(&corpus.documents(), &compiled, corpus.spec.window).matrix;
    let preds = stub_predictions(&regex, 5);
    let mut reversed = preds.clone();
    reversed.reverse();
    let cats = corpus.catalog.categories();
    let a = combine_matrix(&regex, &preds, &EnsembleConfig::default(), &cats).unwrap();
    let b = combine_matrix(&regex, &reversed, &EnsembleConfig::default(), &cats).unwrap();
    assert_eq!(a, b);
}

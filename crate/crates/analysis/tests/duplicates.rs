use claimdrift_analysis::hdbscan;

#[test]
fn zero_variance_blobs_form_clusters() {
    // Three blobs of 20 identical points each, far apart.
    let mut points = Vec::new();
    for &(x, y) in &[(0.0, 0.0), (10.0, 0.0), (0.0, 10.0)] {
        for _ in 0..20 {
            points.push(vec![x, y]);
        }
    }
    let labels = hdbscan(&points, 5).unwrap();
    let distinct: std::collections::BTreeSet<i32> =
        labels.iter().copied().filter(|&l| l >= 0).collect();
    assert_eq!(distinct.len(), 3, "labels: {labels:?}");
}

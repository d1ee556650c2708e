use sphere_frames::frame_finder::{find_orthogonal_frame, select_next, FinderConfig, SubspaceFrame};
use sphere_frames::montecarlo::MembershipOracle;
use sphere_frames::zonal::ZonalProfile;

#[test]
fn cap_complement_selection_keeps_most_of_the_slice() {
    let eps = 0.05;
    let oracle = MembershipOracle::from_zonal_e1(ZonalProfile::cap_complement(8, eps).unwrap()).unwrap();
    let frame = SubspaceFrame::full(8);
    let good = (0..10)
        .filter(|&s| {
            let sel = select_next(&oracle, &frame, &FinderConfig::with_seed(s), 0).unwrap();
            sel.estimate.mean >= 1.0 - 2.0 * eps
        })
        .count();
    assert!(good >= 9, "{good}/10");
}

#[test]
fn selection_is_at_least_the_candidate_mean() {
    let oracle = MembershipOracle::from_zonal_e1(ZonalProfile::band(8, 1.0 / 8f64.sqrt()).unwrap()).unwrap();
    let sel = select_next(&oracle, &SubspaceFrame::full(8), &FinderConfig::with_seed(3), 0).unwrap();
    let mean = sel.candidate_means.iter().sum::<f64>() / sel.candidate_means.len() as f64;
    assert!(sel.estimate.mean >= mean);
    assert!(sel.candidate_means.iter().all(|&m| m <= sel.estimate.mean));
}

#[test]
fn frames_are_reproducible() {
    let oracle = MembershipOracle::from_zonal_e1(ZonalProfile::cap_complement(10, 0.05).unwrap())
        .unwrap()
        .with_symmetrize(false);
    let cfg = FinderConfig::with_seed(99);
    let a = find_orthogonal_frame(&oracle, &cfg).unwrap();
    let b = find_orthogonal_frame(&oracle, &cfg).unwrap();
    assert_eq!(a.vectors, b.vectors);
    assert!(a.verify(&oracle).passed);
}

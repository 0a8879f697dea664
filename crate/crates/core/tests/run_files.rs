use linnet_dp::model::{read_run_dir, run_mcmc, write_run_files, Center, FitConfig, ModelContext, RunFiles};
use linnet_dp::network::LinearNetwork;
use linnet_dp::sim::{sim_mixture, MixtureParams, TimeMode};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn synthetic_run(cfg: &FitConfig) -> (LinearNetwork<f64>, linnet_dp::Run) {
    let net = LinearNetwork::lattice(11, 100.0);
    let c = |x: f64, y: f64, t: f64| Center { location: net.nearest_point([x, y]).point, pixel: None, time: t };
    let params = MixtureParams {
        centers: vec![c(250.0, 250.0, 0.3), c(750.0, 700.0, 0.7)],
        weights: vec![0.5, 0.5],
        w_s: 150.0,
        w_t: 0.1,
    };
    let mut rng = ChaCha8Rng::seed_from_u64(21);
    let truth = sim_mixture(&net, &params, 200, TimeMode::Truncated, &mut rng).unwrap();
    let kernels = cfg.kernels(&net);
    let pixels = cfg.pixels(&net);
    let ctx = ModelContext { net: &net, kernels: &kernels, pixels: &pixels };
    let run = run_mcmc(&truth.events, ctx, cfg).unwrap();
    (net, run)
}

#[test]
fn run_files_read_back_to_the_same_states() {
    let cfg = FitConfig { max_clusters: 6, iterations: 200, thin: 4, ..Default::default() };
    let (net, run) = synthetic_run(&cfg);
    let dir = tempfile::tempdir().unwrap();
    let files = RunFiles::in_dir(dir.path());
    write_run_files(&files, &run.snapshots, &net, Some("abc")).unwrap();
    let back = read_run_dir(&files, &net).unwrap();
    assert_eq!(back.len(), run.snapshots.len());
    for (a, b) in run.snapshots.iter().zip(&back) {
        assert_eq!(a.iteration, b.iteration);
        let (a, b) = (&a.state, &b.state);
        assert_eq!((a.w_s, a.w_t, a.b_u), (b.w_s, b.w_t, b.b_u));
        assert_eq!(a.sticks, b.sticks);
        assert_eq!(a.stick_log_complements, b.stick_log_complements);
        assert_eq!(a.weights, b.weights);
        assert_eq!(a.memberships, b.memberships);
        for (x, y) in a.centers.iter().zip(&b.centers) {
            assert_eq!((x.location.segment, x.location.offset, x.time), (y.location.segment, y.location.offset, y.time));
            assert!((x.location.xy[0] - y.location.xy[0]).abs() < 1e-9);
            assert!((x.location.xy[1] - y.location.xy[1]).abs() < 1e-9);
        }
    }
}

#[test]
fn default_steps_give_moderate_theta_acceptance() {
    let cfg = FitConfig { max_clusters: 10, iterations: 3000, ..Default::default() };
    let (_, run) = synthetic_run(&cfg);
    let rate = run.acceptance.theta_rate();
    assert!(rate > 0.10 && rate < 0.60, "θ acceptance {rate}");
}

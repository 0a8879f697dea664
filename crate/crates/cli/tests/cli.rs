use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_linnet-dp"))
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn ok(args: &[&str]) -> Output {
    let out = run(args);
    assert!(
        out.status.success(),
        "{args:?} failed: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    out
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

/// `n × n` lattice of streets `step` meters apart.
fn write_lattice(path: &Path, n: usize, step: f64) {
    let mut text = String::from("seg_id,x1,y1,x2,y2\n");
    let mut id = 0;
    for i in 0..n {
        for j in 0..n - 1 {
            let (a, b, c) = (i as f64 * step, j as f64 * step, (j + 1) as f64 * step);
            text += &format!("{id},{b},{a},{c},{a}\n");
            text += &format!("{},{a},{b},{a},{c}\n", id + 1);
            id += 2;
        }
    }
    fs::write(path, text).unwrap();
}

struct Fixture {
    dir: tempfile::TempDir,
    network: PathBuf,
    events: PathBuf,
}

impl Fixture {
    /// Lattice plus a simulated three-cluster event file.
    fn new() -> Self {
        let dir = tempfile::tempdir().unwrap();
        let network = dir.path().join("net.csv");
        write_lattice(&network, 11, 100.0);
        let sim = dir.path().join("sim");
        ok(&[
            "simulate",
            "--network",
            s(&network),
            "--out",
            s(&sim),
            "--seed",
            "3",
            "--set",
            "events=300",
            "--set",
            "centers=200:200:0.2;800:300:0.5;400:800:0.8",
        ]);
        Fixture {
            events: sim.join("events.csv"),
            network,
            dir,
        }
    }

    fn path(&self, name: &str) -> PathBuf {
        self.dir.path().join(name)
    }

    fn fit(&self, out: &str, iters: &str) -> PathBuf {
        let out = self.path(out);
        ok(&[
            "fit",
            "--network",
            s(&self.network),
            "--events",
            s(&self.events),
            "--out",
            s(&out),
            "--seed",
            "5",
            "--iters",
            iters,
            "--max-clusters",
            "5",
            "--thin",
            "5",
        ]);
        out
    }
}

#[test]
fn missing_events_file_is_an_input_error() {
    let fx = Fixture::new();
    let missing = fx.path("nope.csv");
    let out = run(&[
        "fit",
        "--network",
        s(&fx.network),
        "--events",
        s(&missing),
        "--out",
        s(&fx.path("run")),
    ]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("nope.csv"));
    assert!(!fx.path("run").exists());
}

#[test]
fn same_seed_gives_identical_files() {
    let fx = Fixture::new();
    let a = fx.fit("a", "200");
    let b = fx.fit("b", "200");
    for f in ["samples.csv", "centers.csv", "memberships.csv", "weights.csv"] {
        assert_eq!(fs::read(a.join(f)).unwrap(), fs::read(b.join(f)).unwrap(), "{f}");
    }
    let pa = fx.path("pa");
    let pb = fx.path("pb");
    ok(&["postprocess", "--run", s(&a), "--out", s(&pa)]);
    ok(&["postprocess", "--run", s(&a), "--out", s(&pb)]);
    assert_eq!(
        fs::read(pa.join("clusters.csv")).unwrap(),
        fs::read(pb.join("clusters.csv")).unwrap()
    );
}

#[test]
fn synthetic_fit_recovers_about_three_clusters() {
    let fx = Fixture::new();
    let run_dir = fx.fit("run", "5000");
    let post = fx.path("post");
    ok(&["postprocess", "--run", s(&run_dir), "--out", s(&post)]);
    let text = fs::read_to_string(post.join("clusters.csv")).unwrap();
    let mut lines = text.lines();
    assert!(lines.next().unwrap().starts_with("# manifest="));
    assert_eq!(lines.next().unwrap(), "cluster,seg_id,offset,x,y,t,size,quarter");
    let k = lines.count();
    assert!((2..=4).contains(&k), "{k} clusters");

    let assess = fx.path("assess");
    ok(&["assess", "--run", s(&run_dir), "--out", s(&assess)]);
    let summary = fs::read_to_string(assess.join("assess_summary.csv")).unwrap();
    let row: Vec<&str> = summary.lines().nth(2).unwrap().split(',').collect();
    let corr: f64 = row[1].parse().unwrap();
    // 300 events over 250 cells: multinomial noise alone keeps r well
    // below 1
    assert!(corr >= 0.75, "correlation {corr}");
}

#[test]
fn run_paired_with_another_network_is_a_consistency_error() {
    let fx = Fixture::new();
    let run_dir = fx.fit("run", "100");
    let other = fx.path("other.csv");
    write_lattice(&other, 11, 101.0);
    let out = run(&[
        "postprocess",
        "--run",
        s(&run_dir),
        "--network",
        s(&other),
        "--out",
        s(&fx.path("post")),
    ]);
    assert_eq!(out.status.code(), Some(3), "{}", String::from_utf8_lossy(&out.stderr));

    let samples = run_dir.join("samples.csv");
    let text = fs::read_to_string(&samples).unwrap();
    let body = text.split_once('\n').unwrap().1;
    fs::write(&samples, format!("# manifest=deadbeef\n{body}")).unwrap();
    let out = run(&["postprocess", "--run", s(&run_dir), "--out", s(&fx.path("post"))]);
    assert_eq!(out.status.code(), Some(3));
}

#[test]
fn empty_run_files_are_an_input_error() {
    let fx = Fixture::new();
    let run_dir = fx.fit("run", "100");
    let samples = run_dir.join("samples.csv");
    let text = fs::read_to_string(&samples).unwrap();
    let head: Vec<&str> = text.lines().take(2).collect();
    fs::write(&samples, head.join("\n") + "\n").unwrap();
    let out = run(&["postprocess", "--run", s(&run_dir), "--out", s(&fx.path("post"))]);
    assert_eq!(out.status.code(), Some(2), "{}", String::from_utf8_lossy(&out.stderr));
}

#[test]
fn summaries_run_end_to_end() {
    let fx = Fixture::new();
    let k = fx.path("k");
    ok(&[
        "kfun",
        "--network",
        s(&fx.network),
        "--events",
        s(&fx.events),
        "--out",
        s(&k),
        "--mmax-envelopes",
        "19",
        "--set",
        "r_steps=5",
        "--set",
        "t_steps=4",
    ]);
    let summary = fs::read_to_string(k.join("kfun_summary.csv")).unwrap();
    let p: f64 = summary.lines().nth(2).unwrap().split(',').nth(3).unwrap().parse().unwrap();
    assert!(p <= 0.05, "clustered fixture gave p = {p}");

    let g = fx.path("g");
    ok(&[
        "pcf",
        "--network",
        s(&fx.network),
        "--events",
        s(&fx.events),
        "--events",
        s(&fx.events),
        "--out",
        s(&g),
        "--set",
        "r_steps=10",
    ]);
    assert_eq!(fs::read_to_string(g.join("pcf.csv")).unwrap().lines().count(), 12);

    let run_dir = fx.fit("run", "100");
    let amenities = fx.path("amenities.csv");
    fs::write(&amenities, "x,y,type\n200,210,bar\n210,200,bank\n800,300,cafe\n0,0,school\n").unwrap();
    let a = fx.path("a");
    ok(&["amenity", "--run", s(&run_dir), "--amenities", s(&amenities), "--out", s(&a)]);
    let text = fs::read_to_string(a.join("amenity.csv")).unwrap();
    assert_eq!(text.lines().nth(1).unwrap(), "cluster,x,y,entertainment,financial,eatery");
    let manifest = fs::read_to_string(a.join("manifest.json")).unwrap();
    assert!(manifest.contains("\"status\": \"complete\""));
    assert!(manifest.contains("\"amenities_skipped\": 1"));
}

#[test]
fn dated_events_get_quarter_labels() {
    let fx = Fixture::new();
    let text = fs::read_to_string(&fx.events).unwrap();
    let mut dated = String::from("x,y,t\n");
    for line in text.lines().skip(2) {
        let v: Vec<f64> = line.split(',').map(|x| x.parse().unwrap()).collect();
        let day = (v[2] * 729.0).round() as i64;
        let date = chrono_free_date(day);
        dated += &format!("{},{},{date}\n", v[0], v[1]);
    }
    let events = fx.path("dated.csv");
    fs::write(&events, dated).unwrap();
    let run_dir = fx.path("run");
    ok(&[
        "fit",
        "--network",
        s(&fx.network),
        "--events",
        s(&events),
        "--out",
        s(&run_dir),
        "--iters",
        "100",
        "--max-clusters",
        "5",
        "--time-format",
        "date",
        "--t-start",
        "2018-01-01",
        "--t-end",
        "2019-12-31",
    ]);
    let post = fx.path("post");
    ok(&["postprocess", "--run", s(&run_dir), "--out", s(&post)]);
    let text = fs::read_to_string(post.join("clusters.csv")).unwrap();
    for line in text.lines().skip(2) {
        let q = line.rsplit(',').next().unwrap();
        assert!(q.starts_with("2018 Q") || q.starts_with("2019 Q"), "{q}");
    }
}

/// `YYYY-MM-DD` for day `d` counted from 2018-01-01 (d < 730).
fn chrono_free_date(d: i64) -> String {
    let months = [31, 28, 31, 30, 31, 30, 31, 31, 30, 31, 30, 31];
    let (year, mut rem) = if d < 365 { (2018, d) } else { (2019, d - 365) };
    let mut month = 0;
    while rem >= months[month] {
        rem -= months[month];
        month += 1;
    }
    format!("{year}-{:02}-{:02}", month + 1, rem + 1)
}

#[test]
fn unknown_setting_is_rejected() {
    let fx = Fixture::new();
    let out = run(&[
        "simulate",
        "--network",
        s(&fx.network),
        "--out",
        s(&fx.path("x")),
        "--set",
        "bogus=1",
    ]);
    assert_eq!(out.status.code(), Some(2));
}

//! Flux calibration harness: prints correlation-peak SNR statistics for the
//! benchmark scenes across candidate rates.

use qlidar::corr::Method;
use qlidar::model::{build_hot_pixel_mask, GateSchedule, GateWindow, HotPixelMask};
use qlidar::ranging::{detect_falling_edges, extract_profiles, stack_metrics, DetectParams, ProfileOptions};
use qlidar::scenes;
use qlidar::sim::{acquire_stack, simulate_linear_scan, Scene};

fn hot_mask(scene: &Scene, n: usize) -> HotPixelMask {
    let dark = Scene::empty(scene.width, scene.height);
    let det = scenes::base_detector();
    let gate = GateWindow::new(0, 15_000, 344.1).unwrap();
    let stack = acquire_stack(&dark, &det, gate, n, 0xDA12).unwrap();
    build_hot_pixel_mask(&stack, 200).unwrap()
}

fn snr_stats(scene: &Scene, n_frames: usize, seeds: u64, mask: &HotPixelMask) -> (f64, f64, f64) {
    let det = scenes::base_detector();
    let gate = GateWindow::new(9_500, 15_000, 344.1).unwrap();
    let opts = ProfileOptions::default();
    let mut snrs = Vec::new();
    for seed in 0..seeds {
        let stack = acquire_stack(scene, &det, gate, n_frames, 1000 + seed).unwrap();
        let (_, stats) = stack_metrics(&stack, mask, &opts).unwrap();
        snrs.push(stats.snr);
    }
    let mean = snrs.iter().sum::<f64>() / snrs.len() as f64;
    let min = snrs.iter().cloned().fold(f64::INFINITY, f64::min);
    let max = snrs.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    (mean, min, max)
}

fn main() {
    let args: Vec<String> = std::env::args().collect();
    let what = args.get(1).map(|s| s.as_str()).unwrap_or("snr");

    if what == "snr" {
        let (w, h) = (64usize, 64usize);
        let mask = hot_mask(&Scene::empty(w, h), 300);
        println!("== quantum-only 64x64, N=300, delay 20 ns, gate 9.5-24.5 ns ==");
        for rate in [0.05, 0.1, 0.2, 0.35, 0.5, 0.8] {
            let scene = scenes::quantum_only(w, h, rate, 20_000);
            let (mean, min, max) = snr_stats(&scene, 300, 8, &mask);
            println!("pairs/pulse {rate:5.2}: snr mean {mean:7.2} min {min:7.2} max {max:7.2}");
        }
        println!("== classical-only 64x64, N=300 (sync, delay 20 ns, in-gate) ==");
        for rate in [0.5, 1.5, 3.0] {
            let scene = scenes::classical_only(w, h, rate, 20_000);
            let (mean, min, max) = snr_stats(&scene, 300, 8, &mask);
            println!("photons/pulse {rate:5.2}: snr mean {mean:7.2} min {min:7.2} max {max:7.2}");
        }
        println!("== quantum-only at N=5000 (rate 0.35) ==");
        let scene = scenes::quantum_only(w, h, 0.35, 20_000);
        let (mean, min, max) = snr_stats(&scene, 5000, 3, &mask);
        println!("N=5000: snr mean {mean:7.2} min {min:7.2} max {max:7.2}");
    }

    if what == "prof" {
        let (w, h) = (48usize, 48usize);
        let scene = scenes::sync_spoof(w, h, 0.35, 1.5, 16_110, 24_462);
        let det = scenes::base_detector();
        let gate = GateWindow::new(10_000, 15_000, 344.1).unwrap();
        let mut stack = acquire_stack(&scene, &det, gate, 300, 7).unwrap();
        for i in 0..3 {
            let t = std::time::Instant::now();
            stack = acquire_stack(&scene, &det, gate, 300, 7 + i).unwrap();
            println!("acquire_stack 300 frames (parallel): {:?}", t.elapsed());
        }
        let mut g = qlidar::corr::gamma_plus(&stack, Method::Fft).unwrap();
        for _ in 0..3 {
            let t = std::time::Instant::now();
            g = qlidar::corr::gamma_plus(&stack, Method::Fft).unwrap();
            println!("gamma_plus fft (parallel): {:?}", t.elapsed());
        }
        let t = std::time::Instant::now();
        let _ = qlidar::corr::remove_crosstalk(&g, &stack, Default::default()).unwrap();
        println!("remove_crosstalk: {:?}", t.elapsed());
        let counts: u64 = stack.frames().iter().map(|f| f.data().iter().map(|&v| u64::from(v)).sum::<u64>()).sum();
        println!("mean counts/frame: {}", counts as f64 / 300.0);
    }


    if what == "async" {
        let (w, h) = (64usize, 64usize);
        let n_frames = 300;
        let scene = scenes::async_background(w, h, 0.35, 3.5, 20_682);
        let det = scenes::base_detector();
        let window = GateWindow::new(0, 15_000, 344.1).unwrap();
        let schedule = GateSchedule::new(0, 90, 300, window).unwrap();
        let t0 = std::time::Instant::now();
        let dataset = simulate_linear_scan(&scene, &det, &schedule, n_frames, 42).unwrap();
        println!("sim: {:?}", t0.elapsed());
        let mask = hot_mask(&Scene::empty(w, h), n_frames);
        let opts = ProfileOptions { method: Method::Fft, ..ProfileOptions::default() };
        let profiles = extract_profiles(&dataset, &mask, &opts).unwrap();
        let intensity = detect_falling_edges(&profiles.gate_times_ps, &profiles.mean_intensity, &DetectParams::default());
        let corr = detect_falling_edges(&profiles.gate_times_ps, &profiles.corr_peak, &DetectParams::default());
        println!("intensity edges: {:?}", intensity.iter().map(|e| e.t0_ps).collect::<Vec<_>>());
        println!("corr edges:      {:?}", corr.iter().map(|e| e.t0_ps).collect::<Vec<_>>());
        for g in (0..300).step_by(30) {
            println!("gate {g:3} t={:6} mean_int {:8.4} peak {:8.3} snr {:7.2}", profiles.gate_times_ps[g], profiles.mean_intensity[g], profiles.corr_peak[g], profiles.corr_snr[g]);
        }
        // subtraction IoU check
        use qlidar::ranging::edge_subtraction_image;
        let sub = edge_subtraction_image(&dataset, &mask, corr[0].t0_ps, 45).unwrap();
        let truth = scene.pair_source.as_ref().unwrap().target.mask.clone();
        let vals: Vec<f64> = sub.image.data().iter().map(|&v| v as f64).collect();
        let thr = otsu(&vals);
        let (mut tp, mut fp, mut fneg) = (0u32, 0u32, 0u32);
        for (i, &v) in vals.iter().enumerate() {
            let pred = v > thr;
            let act = truth.weights()[i] > 0.5;
            match (pred, act) { (true, true) => tp += 1, (true, false) => fp += 1, (false, true) => fneg += 1, _ => {} }
        }
        let iou = tp as f64 / (tp + fp + fneg) as f64;
        println!("subtraction IoU = {iou:.3} (thr {thr:.1})");
    }


    if what == "adaptive" {
        use qlidar::adaptive::{correlation_driven_search, SearchParams};
        use qlidar::ranging::fit_erf_edge;
        use qlidar::sim::acquire_stack_at_gate_index;
        let (w, h) = (64usize, 64usize);
        let det = scenes::base_detector();
        let window = GateWindow::new(0, 15_066, 344.1).unwrap();
        let schedule = GateSchedule::new(0, 18, 2_800, window).unwrap();
        let mask = hot_mask(&Scene::empty(w, h), 300);
        let t_all = std::time::Instant::now();
        for seed in 0..20u64 {
            let frac = (seed.wrapping_mul(0x9E3779B97F4A7C15) >> 11) as f64 / (1u64 << 53) as f64;
            let delay_ps = 16_200 + (frac * 32_400.0) as i64;
            let mut scene = scenes::quantum_only(w, h, 0.35, delay_ps);
            scene.pair_source.as_mut().unwrap().corr_sigma = 0.4;
            let sched = schedule.clone();
            let (scene2, det2) = (scene.clone(), det.clone());
            let acquire = move |gate_index: usize, n_frames: usize| {
                acquire_stack_at_gate_index(&scene2, &det2, &sched, gate_index, n_frames, 1_000 + seed).unwrap()
            };
            let t = std::time::Instant::now();
            let out = correlation_driven_search(acquire, 2_800, 300, &mask, &SearchParams::default()).unwrap();
            let t_adaptive = t.elapsed();
            // Linear reference: dense subrange around the true edge.
            let true_gate = (delay_ps as f64 / 18.0) as i64;
            let lo = (true_gate - 110).max(0) as usize;
            let n_lin = 200usize;
            let t = std::time::Instant::now();
            let lin_schedule = GateSchedule::new(lo as i64 * 18, 18, n_lin, window).unwrap();
            let dataset = simulate_linear_scan(&scene, &det, &lin_schedule, 300, 1_000 + seed).unwrap();
            let profiles = extract_profiles(&dataset, &mask, &ProfileOptions::default()).unwrap();
            let samples: Vec<(f64, f64)> = profiles.gate_times_ps.iter().zip(&profiles.corr_peak).map(|(&t, &y)| (t as f64, y)).collect();
            let linear_fit = fit_erf_edge(&samples).unwrap();
            let t_linear = t.elapsed();
            let diff_gates = (out.fit.t0_ps - linear_fit.t0_ps) / 18.0;
            println!(
                "seed {seed}: delay {delay_ps} ps, probes {}, adaptive t0 {:.0}, linear t0 {:.0}, diff {:+.2} gates, err_vs_truth {:+.2}/{:+.2}, times {:?}/{:?}",
                out.state.probed.len(), out.fit.t0_ps, linear_fit.t0_ps, diff_gates,
                (out.fit.t0_ps - delay_ps as f64) / 18.0, (linear_fit.t0_ps - delay_ps as f64) / 18.0,
                t_adaptive, t_linear
            );
            if diff_gates.abs() > 3.0 {
                println!("  bracket {:?}, fit sigma {:.1} A {:.2} B {:.3}", out.state.bracket, out.fit.sigma_ps, out.fit.amplitude, out.fit.baseline);
                for pr in &out.state.probed {
                    println!("  probe idx={:5} t={:7} peak={:8.3} snr={:7.2} {}", pr.gate_index, pr.gate_start_ps, pr.corr_peak, pr.corr_snr, pr.phase);
                }
            }
        }
        println!("total: {:?}", t_all.elapsed());
    }

    if what == "scan" {
        // Sync-spoof scan at bench scale.
        let (w, h) = (64usize, 64usize);
        let n_frames = 300;
        let scene = scenes::sync_spoof(w, h, 0.35, 1.5, 16_110, 24_462);
        let det = scenes::base_detector();
        let window = GateWindow::new(0, 15_000, 344.1).unwrap();
        let schedule = GateSchedule::new(0, 90, 300, window).unwrap();
        let t0 = std::time::Instant::now();
        let dataset = simulate_linear_scan(&scene, &det, &schedule, n_frames, 42).unwrap();
        println!("sim: {:?}", t0.elapsed());
        let mask = hot_mask(&Scene::empty(w, h), n_frames);
        let t1 = std::time::Instant::now();
        let opts = ProfileOptions { method: Method::Fft, ..ProfileOptions::default() };
        let profiles = extract_profiles(&dataset, &mask, &opts).unwrap();
        println!("profiles: {:?}", t1.elapsed());
        let intensity =
            detect_falling_edges(&profiles.gate_times_ps, &profiles.mean_intensity, &DetectParams::default());
        let corr =
            detect_falling_edges(&profiles.gate_times_ps, &profiles.corr_peak, &DetectParams::default());
        println!("intensity edges: {:?}", intensity.iter().map(|e| e.t0_ps).collect::<Vec<_>>());
        println!("corr edges:      {:?}", corr.iter().map(|e| e.t0_ps).collect::<Vec<_>>());
        for g in (0..300).step_by(30) {
            println!(
                "gate {g:3} t={:6} mean_int {:8.4} peak {:8.3} snr {:7.2}",
                profiles.gate_times_ps[g],
                profiles.mean_intensity[g],
                profiles.corr_peak[g],
                profiles.corr_snr[g]
            );
        }
    }
}

fn otsu(values: &[f64]) -> f64 {
    let max = values.iter().cloned().fold(f64::NEG_INFINITY, f64::max).max(1.0);
    let mut hist = [0u32; 256];
    for &v in values { hist[((v / max * 255.0) as usize).min(255)] += 1; }
    let total: u32 = values.len() as u32;
    let sum_all: f64 = hist.iter().enumerate().map(|(i, &c)| i as f64 * c as f64).sum();
    let (mut w0, mut sum0, mut best, mut best_t) = (0u32, 0.0f64, -1.0f64, 0usize);
    for t in 0..256 {
        w0 += hist[t];
        if w0 == 0 { continue; }
        let w1 = total - w0;
        if w1 == 0 { break; }
        sum0 += t as f64 * hist[t] as f64;
        let m0 = sum0 / w0 as f64;
        let m1 = (sum_all - sum0) / w1 as f64;
        let between = w0 as f64 * w1 as f64 * (m0 - m1).powi(2);
        if between > best { best = between; best_t = t; }
    }
    best_t as f64 / 255.0 * max
}

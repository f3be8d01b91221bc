use friabilis::experiments::{population, run_average, run_clt, AverageConfig, CltRunConfig};
use friabilis_core::arith::{Limits, Sieve};
use friabilis_core::divdist::{exact_law, moments, nudge_off_atoms};
use friabilis_core::perron::gaussian_tail;

#[test]
fn sampled_mean_agrees_with_full_enumeration() {
    let sieve = Sieve::new(100).unwrap();
    let limits = Limits::DEFAULT;
    let z = 0.5;
    let tail = |f: &friabilis_core::arith::Factorization| {
        let law = exact_law(f).unwrap();
        let (t, _) = nudge_off_atoms(&law, 0.5 * f.log_value() + z * moments(f).sigma());
        law.exact_upper_tail(t)
    };
    let full = population(1_000_000, 100, &sieve, &limits, usize::MAX, 0).unwrap();
    let full_values: Vec<f64> = full.members.iter().map(&tail).collect();
    let mean_full = full_values.iter().sum::<f64>() / full_values.len() as f64;
    for seed in [1, 2, 3] {
        let sample = population(1_000_000, 100, &sieve, &limits, 2000, seed).unwrap();
        assert!(sample.sampled);
        let v: Vec<f64> = sample.members.iter().map(&tail).collect();
        let n = v.len() as f64;
        let mean = v.iter().sum::<f64>() / n;
        let var = v.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
        let se = (var / n).sqrt();
        assert!((mean - mean_full).abs() <= 3.0 * se, "seed {seed}: {mean} vs {mean_full} (se {se})");
    }
}

#[test]
fn rows_are_consistent() {
    let sieve = Sieve::new(100).unwrap();
    let cfg = CltRunConfig::new(1_000_000, 100, vec![0.0, 0.5, 1.0, 2.0]);
    let r = run_clt(&cfg, &sieve, &Limits::DEFAULT).unwrap();
    for row in &r.rows {
        assert!((0.0..=1.0).contains(&row.exceptional_fraction));
        assert!(row.exceptional_count <= row.n_tested);
        if row.n_tested > 0 {
            assert!(row.median_normalized_error <= row.max_normalized_error);
        } else {
            assert!(row.median_normalized_error.is_nan());
        }
    }
    // larger z is admitted only for integers with w_n >= z^4
    assert!(r.rows[3].n_tested < r.rows[0].n_tested);
    let bins: usize = r.w_bins.iter().filter(|b| b.z == 1.0).map(|b| b.count).sum();
    assert_eq!(bins, r.rows[2].n_tested);

    let avg = run_average(&AverageConfig::new(1_000_000, 100, vec![-0.5, 0.0, 0.5]), &sieve, &Limits::DEFAULT).unwrap();
    for row in &avg.rows {
        assert!((row.phi - gaussian_tail(row.z)).abs() <= 1e-12);
        assert!((0.0..=1.0).contains(&row.d));
    }
    assert!(avg.rows[0].d > avg.rows[1].d && avg.rows[1].d > avg.rows[2].d);
}

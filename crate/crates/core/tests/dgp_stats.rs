use panel_influence::{
    analyze, fit, generate, hat_blocks, leave_one_out, within_group_transform, AnomalyKind,
    DgpConfig, InfluenceOptions, Label, PanelDataset, Preset, UnitClass,
};

fn csv_bytes(p: &PanelDataset) -> Vec<u8> {
    let mut buf = Vec::new();
    p.write_csv(&mut buf).unwrap();
    buf
}

fn figure(seed: u64) -> PanelDataset {
    generate(&DgpConfig::default().with_seed(seed).with_contamination(Preset::Figure.spec())).unwrap()
}

fn appendix(seed: u64) -> PanelDataset {
    generate(&DgpConfig::default().with_seed(seed).with_contamination(Preset::Appendix.spec())).unwrap()
}

#[test]
fn same_seed_same_panel() {
    assert_eq!(csv_bytes(&figure(9)), csv_bytes(&figure(9)));
    assert_ne!(csv_bytes(&figure(9)), csv_bytes(&figure(10)));
}

#[test]
fn contamination_leaves_other_cells_untouched() {
    let spec = Preset::Appendix.spec();
    let clean = generate(&DgpConfig::default().with_seed(4)).unwrap();
    let dirty = appendix(4);
    for (c, d) in clean.units().iter().zip(dirty.units()) {
        let Label::Int(id) = c.id else { unreachable!() };
        let entry = spec.entries.iter().find(|e| e.unit == id);
        for (s, time) in c.times.iter().enumerate() {
            let Label::Int(t) = time else { unreachable!() };
            if entry.is_some_and(|e| e.periods.contains(t)) {
                continue;
            }
            assert_eq!(c.y[s], d.y[s], "unit {id} t {t}");
            assert_eq!(c.x[(s, 0)], d.x[(s, 0)], "unit {id} t {t}");
        }
    }
}

#[test]
fn replaced_regressors_have_configured_means() {
    let spec = Preset::Appendix.spec();
    for (kind, target) in [(AnomalyKind::GL, 15.0), (AnomalyKind::BL, 10.0)] {
        let mut values = Vec::new();
        for seed in 0..200 {
            let p = appendix(seed);
            for unit in spec.units_of(kind) {
                let entry = spec.entries.iter().find(|e| e.unit == unit).unwrap();
                let u = &p.units()[(unit - 1) as usize];
                for &t in &entry.periods {
                    values.push(u.x[((t - 1) as usize, 0)]);
                }
            }
        }
        let n = values.len() as f64;
        let mean = values.iter().sum::<f64>() / n;
        let sd = (values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0)).sqrt();
        assert!((mean - target).abs() < 3.0 * sd / n.sqrt(), "{kind:?}: mean {mean}");
    }
}

#[test]
fn clean_panels_recover_slope() {
    let betas: Vec<f64> = (0..100)
        .map(|seed| {
            let p = generate(&DgpConfig::default().with_seed(1000 + seed)).unwrap();
            fit(&within_group_transform(&p)).unwrap().beta_hat()[0]
        })
        .collect();
    let mean = betas.iter().sum::<f64>() / 100.0;
    let sd = (betas.iter().map(|b| (b - mean).powi(2)).sum::<f64>() / 99.0).sqrt();
    assert!((mean - 0.5).abs() < 3.0 * sd / 10.0, "mean {mean}, sd {sd}");
}

#[test]
fn dropping_bad_leverage_unit_moves_slope_towards_truth() {
    for seed in 0..10 {
        let p = figure(seed);
        let d = within_group_transform(&p);
        let f = fit(&d).unwrap();
        let h = hat_blocks(&f, &d);
        let bl = p.position(&Label::Int(10)).unwrap();
        let dropped = leave_one_out(&f, &h, bl).unwrap().beta[0];
        assert!((dropped - 0.5).abs() < (f.beta_hat()[0] - 0.5).abs(), "seed {seed}");
    }
}

#[test]
fn figure_preset_places_planted_units() {
    let p = figure(3);
    let r = analyze(&p, InfluenceOptions::default()).unwrap().report;
    assert_eq!(r.class_of(&Label::Int(10)), Some(UnitClass::BL));
    assert_eq!(r.class_of(&Label::Int(20)), Some(UnitClass::GL));
    assert_eq!(r.class_of(&Label::Int(30)), Some(UnitClass::VO));
}

#[test]
fn appendix_preset_leverage_and_influence() {
    let p = appendix(7);
    let r = analyze(&p, InfluenceOptions::default()).unwrap().report;
    let cut = r.cutoffs.leverage_cut;
    let planted: Vec<usize> = [20, 30, 50, 60]
        .iter()
        .map(|id| r.position(&Label::Int(*id)).unwrap())
        .collect();
    for &i in &planted {
        assert!(r.units[i].leverage > cut, "unit {}", r.units[i].id);
    }
    let clean: Vec<f64> = (1..=100)
        .filter(|id| ![10, 20, 30, 40, 50, 60].contains(id))
        .map(|id| r.units[r.position(&Label::Int(id)).unwrap()].leverage)
        .collect();
    assert!(clean.iter().sum::<f64>() / (clean.len() as f64) < cut);

    for (id, class) in [
        (10, UnitClass::VO),
        (20, UnitClass::GL),
        (30, UnitClass::BL),
        (40, UnitClass::VO),
        (50, UnitClass::GL),
        (60, UnitClass::BL),
    ] {
        assert_eq!(r.class_of(&Label::Int(id)), Some(class), "unit {id}");
    }
    // same-type pairs mask each other; the ten-period BL unit still stands out
    let cii = r.units[r.position(&Label::Int(30)).unwrap()].cook.unwrap();
    assert!(cii > 1.0 && cii > r.cutoffs.f_median, "C_ii {cii}");
}

#[test]
fn planted_units_mask_some_clean_unit() {
    let p = figure(5);
    let r = analyze(&p, InfluenceOptions::default()).unwrap().report;
    let planted = [10, 20].map(|id| r.position(&Label::Int(id)).unwrap());
    let contaminated = [10, 20, 30].map(|id| r.position(&Label::Int(id)).unwrap());
    let masked = (0..r.meta.n)
        .filter(|i| !contaminated.contains(i))
        .any(|i| {
            planted
                .iter()
                .any(|&j| r.matrices.conditional_effect.get(i, j).is_some_and(|m| m >= 1.0))
        });
    assert!(masked);
}

use cfa_core::decomp::*;
use cfa_core::nuisance::*;
use cfa_core::sfm::folds::assign_folds;
use cfa_core::synth::*;

fn main() {
    let base = desk_1();
    let gt = oracle_decomposition_exact(&base).unwrap();
    let bound = 0.02 * gt.sd_y;
    println!("bound {:.4}", bound);
    let g = GbtConfig { n_trees: 100, max_depth: 6, learning_rate: 0.30, min_leaf: 5 };
    let mut pass = vec![];
    for s in 0..14u64 {
        let mut spec = desk_1();
        spec.seed = s;
        let data = sample(&spec, 50_000).unwrap();
        let folds = assign_folds(data.n, 10, 21).unwrap();
        let cfg = NuisanceConfig {
            outcome: LearnerConfig::GradientBoostedTrees(g.clone()),
            mediator: LearnerConfig::GradientBoostedTrees(g.clone()),
            nested: LearnerConfig::GradientBoostedTrees(g.clone()),
            ..Default::default()
        };
        let fits = cross_fit(&data, &folds, &cfg).unwrap();
        let d = debiased_decomposition(&data, &fits).unwrap();
        let p = plugin_strata(&data, None).unwrap();
        let errs_d = [d.tv.estimate - gt.tv, d.x_de.estimate - gt.x_de, d.x_ie.estimate - gt.x_ie, d.x_se.estimate - gt.x_se];
        let errs_p = [p.tv.estimate - gt.tv, p.x_de.estimate - gt.x_de, p.x_ie.estimate - gt.x_ie, p.x_se.estimate - gt.x_se];
        let ok_d = errs_d.iter().all(|e| e.abs() <= bound);
        let ok_p = errs_p.iter().all(|e| e.abs() <= bound);
        let ses = [d.tv.se, d.x_de.se, d.x_ie.se, d.x_se.se];
        let ok_se = errs_d.iter().zip(&ses).all(|(e, s)| e.abs() <= 4.0 * s);
        println!("seed {s:2}: deb [{:+.4} {:+.4} {:+.4} {:+.4}] plug [{:+.4} {:+.4} {:+.4} {:+.4}] {} {}",
            errs_d[0], errs_d[1], errs_d[2], errs_d[3],
            errs_p[0], errs_p[1], errs_p[2], errs_p[3],
            if ok_d && ok_se {"D-OK"} else {"d-no"}, if ok_p {"P-OK"} else {"p-no"});
        if ok_d && ok_p && ok_se { pass.push(s); }
    }
    println!("both pass: {:?}", pass);
}

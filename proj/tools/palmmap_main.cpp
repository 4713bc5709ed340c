#include <iostream>

#include "CLI11.hpp"
#include "palmmap/pipeline/stages.hpp"
#include "palmmap/util/parallel.hpp"

using namespace palmmap;

int main(int argc, char** argv) {
    CLI::App app{"Oil-palm extent and age mapping from annual radar composites and optical time series"};
    app.require_subcommand(1);

    int workers = 0;
    uint64_t seed = 42;
    app.add_option("--workers", workers, "worker threads (default: PALMMAP_WORKERS or all cores)");
    app.add_option("--seed", seed, "random seed override");

    // synth
    auto* synth = app.add_subcommand("synth", "generate a synthetic scene set with ground truth");
    std::string synth_spec, synth_out;
    synth->add_option("--spec", synth_spec, "scene spec JSON")->required();
    synth->add_option("--out", synth_out, "output directory")->required();

    // composite
    auto* composite = app.add_subcommand("composite", "build the annual radar composite");
    std::string comp_manifest, comp_out;
    int comp_year = 2017;
    CompositeParams comp_params;
    composite->add_option("--manifest", comp_manifest)->required();
    composite->add_option("--year", comp_year)->required();
    composite->add_option("--out", comp_out, "output directory")->required();
    composite->add_option("--trim-fraction", comp_params.trim_fraction);
    composite->add_option("--theta-ref", comp_params.theta_ref);
    composite->add_option("--default-slope", comp_params.default_slope);
    composite->add_flag("--no-fit-slope", [&comp_params](int64_t) { comp_params.fit_slope = false; },
                        "use the default slope instead of fitting");

    // texture
    auto* texture = app.add_subcommand("texture", "SAVG texture maps over byte-scaled bands");
    std::string tex_in, tex_out, tex_bands = "vv_byte,vh_byte,diff_byte";
    GlcmParams tex_params;
    texture->add_option("--in", tex_in, "composite GeoTIFF")->required();
    texture->add_option("--bands", tex_bands, "comma-separated band names");
    texture->add_option("--out", tex_out)->required();
    texture->add_option("--levels", tex_params.levels);
    texture->add_option("--radius", tex_params.radius);

    // indices
    auto* indices = app.add_subcommand("indices", "optical index composites and series stores");
    std::string idx_manifest, idx_index = "bsi", idx_series_out, idx_raster_out;
    int idx_year = 0, idx_window = 365, idx_min_obs = 3;
    indices->add_option("--manifest", idx_manifest)->required();
    indices->add_option("--index", idx_index, "ndvi or bsi");
    indices->add_option("--out-series", idx_series_out, "write a monthly-median series store");
    indices->add_option("--out", idx_raster_out, "write an annual median raster (needs --year)");
    indices->add_option("--year", idx_year);
    indices->add_option("--window-days", idx_window);
    indices->add_option("--min-obs", idx_min_obs);

    // classify
    auto* classify = app.add_subcommand("classify", "stratified unsupervised classification");
    classify->require_subcommand(1);
    auto* cfit = classify->add_subcommand("fit", "fit per-cell k-means models");
    std::string fit_composite, fit_textures, fit_out;
    ClassifyConfig fit_cfg;
    cfit->add_option("--composite", fit_composite)->required();
    cfit->add_option("--textures", fit_textures)->required();
    cfit->add_option("--out", fit_out, "models directory")->required();
    cfit->add_option("--cell-side", fit_cfg.cell_side);
    cfit->add_option("--samples", fit_cfg.n_samples);
    cfit->add_option("--k-min", fit_cfg.kmeans.k_min);
    cfit->add_option("--k-max", fit_cfg.kmeans.k_max);

    auto* clabel = classify->add_subcommand("label", "bootstrap a label table from a truth raster");
    std::string label_models, label_truth, label_out;
    double label_fraction = 0.5;
    clabel->add_option("--models", label_models)->required();
    clabel->add_option("--truth", label_truth)->required();
    clabel->add_option("--out", label_out)->required();
    clabel->add_option("--min-fraction", label_fraction);

    auto* cpredict = classify->add_subcommand("predict", "apply each cell model to the whole area");
    std::string pred_models, pred_composite, pred_textures, pred_out;
    cpredict->add_option("--models", pred_models)->required();
    cpredict->add_option("--composite", pred_composite)->required();
    cpredict->add_option("--textures", pred_textures)->required();
    cpredict->add_option("--out", pred_out, "class-map directory")->required();

    auto* cvote = classify->add_subcommand("vote", "label clusters and reconcile by majority vote");
    std::string vote_classes, vote_labels, vote_out;
    int vote_threshold = 7;
    cvote->add_option("--classes", vote_classes)->required();
    cvote->add_option("--labels", vote_labels)->required();
    cvote->add_option("--threshold", vote_threshold);
    cvote->add_option("--out", vote_out)->required();

    // postproc
    auto* postproc = app.add_subcommand("postproc", "rule-based corrections and MMU enforcement");
    std::string pp_mask, pp_ndvi, pp_exclude, pp_dem, pp_out;
    PostprocConfig pp_cfg;
    postproc->add_option("--mask", pp_mask, "voted oil-palm map")->required();
    postproc->add_option("--ndvi", pp_ndvi)->required();
    postproc->add_option("--exclude", pp_exclude, "comma-separated exclusion masks");
    postproc->add_option("--dem", pp_dem);
    postproc->add_option("--out", pp_out)->required();
    postproc->add_option("--ndvi-floor", pp_cfg.ndvi_floor);
    postproc->add_option("--mmu", pp_cfg.mmu_m2, "minimum mapping unit in m^2");
    postproc->add_option("--slope-threshold", pp_cfg.slope_fill_threshold_deg);
    postproc->add_option("--meters-per-unit", pp_cfg.meters_per_unit);

    // age
    auto* age = app.add_subcommand("age", "date canopy closure per extent pixel");
    std::string age_extent, age_series, age_loss, age_out, age_threshold = "auto";
    AgeConfig age_cfg;
    age->add_option("--extent", age_extent)->required();
    age->add_option("--series", age_series, "BSI series store directory")->required();
    age->add_option("--loss", age_loss, "forest-loss-year raster (optional)");
    age->add_option("--out", age_out, "output directory")->required();
    age->add_option("--ref-year", age_cfg.ref_year);
    age->add_option("--threshold", age_threshold, "'auto' (percentile calibration) or a BSI value");
    age->add_option("--percentile", age_cfg.percentile);
    age->add_option("--offset", age_cfg.closure_age_offset, "closure age offset in years");
    age->add_option("--min-months", age_cfg.min_months);

    // validate
    auto* validate = app.add_subcommand("validate", "stratified sampling and accuracy reporting");
    std::string val_extent, val_out, val_interp, val_alloc = "equal";
    ValidateConfig val_cfg;
    validate->add_option("--extent", val_extent)->required();
    validate->add_option("--out", val_out)->required();
    validate->add_option("--sample", val_cfg.n_total, "total sample size");
    validate->add_option("--allocation", val_alloc, "equal or proportional");
    validate->add_option("--interpretations", val_interp, "interpretation CSV");

    // report
    auto* report = app.add_subcommand("report", "regional statistics and product comparison");
    std::string rep_extent, rep_closure, rep_regions, rep_compare, rep_out;
    AgeConfig rep_age;
    double rep_mpu = 1.0;
    report->add_option("--extent", rep_extent)->required();
    report->add_option("--closure", rep_closure)->required();
    report->add_option("--regions", rep_regions, "name=mask.tif[,name=mask.tif...]");
    report->add_option("--compare", rep_compare, "other product extent raster");
    report->add_option("--out", rep_out)->required();
    report->add_option("--ref-year", rep_age.ref_year);
    report->add_option("--offset", rep_age.closure_age_offset);
    report->add_option("--meters-per-unit", rep_mpu);

    // run / check-config
    auto* run = app.add_subcommand("run", "run the pipeline from a config file");
    std::string run_config, run_stages;
    run->add_option("--config", run_config)->required();
    run->add_option("--stages", run_stages, "comma-separated stage subset");

    auto* check = app.add_subcommand("check-config", "validate a config file");
    std::string check_config;
    check->add_option("--config", check_config)->required();

    CLI11_PARSE(app, argc, argv);

    auto split = [](const std::string& s) {
        std::vector<std::string> out;
        std::string cur;
        for (char ch : s) {
            if (ch == ',') {
                if (!cur.empty()) out.push_back(cur);
                cur.clear();
            } else {
                cur.push_back(ch);
            }
        }
        if (!cur.empty()) out.push_back(cur);
        return out;
    };

    if (workers <= 0) workers = default_workers();

    try {
        if (synth->parsed()) {
            std::string manifest = stage_synth(synth_spec, synth_out, workers);
            std::cout << "manifest: " << manifest << "\n";
        } else if (composite->parsed()) {
            comp_params.workers = workers;
            std::cout << stage_composite(comp_manifest, comp_year, comp_params, comp_out, seed)
                      << "\n";
        } else if (texture->parsed()) {
            std::cout << stage_texture(tex_in, split(tex_bands), tex_params, tex_out, workers)
                      << "\n";
        } else if (indices->parsed()) {
            IndexKind kind = index_kind_from_name(idx_index);
            QaSpec qa;
            if (!idx_series_out.empty()) {
                std::cout << stage_indices_series(idx_manifest, kind, qa, idx_window, idx_min_obs,
                                                  idx_series_out, 256, workers)
                          << "\n";
            } else if (!idx_raster_out.empty()) {
                if (idx_year == 0) throw std::runtime_error("--out requires --year");
                std::cout << stage_indices_annual(idx_manifest, kind, qa, idx_year, idx_raster_out,
                                                  workers)
                          << "\n";
            } else {
                throw std::runtime_error("indices: give --out-series or --out");
            }
        } else if (cfit->parsed()) {
            auto result = stage_classify_fit(fit_composite, fit_textures, fit_cfg, seed, fit_out,
                                             workers);
            std::cout << result.models_dir << " (" << result.cell_ids.size() << " cells)\n";
        } else if (clabel->parsed()) {
            std::cout << stage_classify_label_from_truth(label_models, label_truth, label_fraction,
                                                         label_out)
                      << "\n";
        } else if (cpredict->parsed()) {
            auto paths = stage_classify_predict(pred_models, pred_composite, pred_textures,
                                                pred_out, workers);
            std::cout << pred_out << " (" << paths.size() << " class maps)\n";
        } else if (cvote->parsed()) {
            std::cout << stage_classify_vote(vote_classes, vote_labels, vote_threshold, vote_out)
                      << "\n";
        } else if (postproc->parsed()) {
            pp_cfg.excludes = split(pp_exclude);
            pp_cfg.dem = pp_dem;
            std::cout << stage_postproc(pp_mask, pp_ndvi, pp_cfg, pp_out) << "\n";
        } else if (age->parsed()) {
            if (age_threshold != "auto") {
                age_cfg.auto_threshold = false;
                age_cfg.threshold = std::stod(age_threshold);
            }
            AgeOutputs out = stage_age(age_extent, age_series, age_loss, age_cfg, age_out, workers);
            std::cout << out.closure_path << " (threshold " << out.threshold_used << ")\n";
        } else if (validate->parsed()) {
            val_cfg.allocation =
                val_alloc == "proportional" ? Allocation::PROPORTIONAL : Allocation::EQUAL;
            val_cfg.interpretations = val_interp;
            ValidateOutputs out = stage_validate(val_extent, val_cfg, val_out, seed);
            std::cout << out.samples_csv << "\n";
            if (!out.report_csv.empty()) std::cout << out.report_csv << "\n";
        } else if (report->parsed()) {
            ReportConfig cfg;
            for (const auto& tok : split(rep_regions)) {
                auto eq = tok.find('=');
                if (eq == std::string::npos)
                    throw std::runtime_error("--regions expects name=mask.tif tokens");
                cfg.regions.push_back({tok.substr(0, eq), tok.substr(eq + 1)});
            }
            cfg.compare = rep_compare;
            std::cout << stage_report(rep_extent, rep_closure, cfg, rep_age, rep_mpu, rep_out)
                      << "\n";
        } else if (run->parsed()) {
            RunConfig cfg = load_run_config(run_config);
            auto diags = validate_config(cfg);
            if (!diags.empty()) {
                for (const auto& d : diags) std::cerr << "config: " << d << "\n";
                return 2;
            }
            if (workers > 0) cfg.workers = workers;
            if (app.count("--seed")) cfg.seed = seed;
            return run_pipeline(cfg, split(run_stages));
        } else if (check->parsed()) {
            auto diags = validate_config_file(check_config);
            for (const auto& d : diags) std::cout << d << "\n";
            std::cout << (diags.empty() ? "config OK" : "config has issues") << "\n";
            return diags.empty() ? 0 : 2;
        }
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}

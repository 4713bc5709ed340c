#include "palmmap/pipeline/stages.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include "json.hpp"
#include "palmmap/age/report.hpp"
#include "palmmap/classify/labels.hpp"
#include "palmmap/optical/series.hpp"
#include "palmmap/pipeline/provenance.hpp"
#include "palmmap/postproc/components.hpp"
#include "palmmap/postproc/filters.hpp"
#include "palmmap/raster/geotiff.hpp"
#include "palmmap/raster/resample.hpp"
#include "palmmap/raster/tiling.hpp"
#include "palmmap/synth/generator.hpp"
#include "palmmap/validate/accuracy.hpp"
#include "palmmap/validate/regional.hpp"

namespace palmmap {

namespace fs = std::filesystem;
using nlohmann::json;

void require_input(const std::string& path, const std::string& producing_stage) {
    if (!fs::exists(path))
        throw StageError(producing_stage,
                         "missing artifact '" + path + "'; run the " + producing_stage +
                             " stage first");
}

namespace {

std::string loss_raster_from_manifest(const std::string& manifest_path) {
    if (!fs::exists(manifest_path)) return "";
    SceneManifest m = load_manifest(manifest_path);
    for (const auto& e : m.entries)
        if (e.sensor == Sensor::LOSSYEAR) return e.path;
    return "";
}

}  // namespace

namespace {

// Removes the stage's outputs if the body throws.
template <typename Fn>
auto guard_outputs(const std::vector<std::string>& outputs, Fn&& fn) {
    try {
        return fn();
    } catch (...) {
        for (const auto& p : outputs) {
            std::error_code ec;
            fs::remove_all(p, ec);
            fs::remove(p + ".prov.json", ec);
        }
        throw;
    }
}

std::string fmt_double(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.10g", v);
    return buf;
}

}  // namespace

std::string stage_synth(const std::string& spec_path, const std::string& out_dir, int workers) {
    require_input(spec_path, "synth (scene spec)");
    SceneSpec spec = load_scene_spec(spec_path);
    return guard_outputs({out_dir}, [&] {
        std::string manifest = generate_scene_set(spec, out_dir, workers);
        write_provenance(manifest, "synth", {{"spec", spec_path}}, {spec_path}, spec.seed);
        return manifest;
    });
}

std::string stage_composite(const std::string& manifest_path, int year,
                            const CompositeParams& params, const std::string& out_dir,
                            uint64_t seed) {
    require_input(manifest_path, "synth (or manifest preparation)");
    fs::create_directories(out_dir);
    const std::string out_path = out_dir + "/composite.tif";
    return guard_outputs({out_path}, [&] {
        SceneManifest manifest = load_manifest(manifest_path);
        AnnualComposite composite = build_annual_composite(manifest, year, params);
        write_raster(out_path, composite.raster);
        json p;
        p["year"] = year;
        p["trim_fraction"] = params.trim_fraction;
        p["theta_ref"] = params.theta_ref;
        p["fit_slope"] = params.fit_slope;
        p["default_slope"] = params.default_slope;
        p["fitted_slopes"] = composite.info.slope_by_orbit;
        p["byte_ranges"] = {{"vv", {params.vv_range.lo, params.vv_range.hi}},
                            {"vh", {params.vh_range.lo, params.vh_range.hi}},
                            {"diff", {params.diff_range.lo, params.diff_range.hi}}};
        p["n_scenes"] = composite.info.n_scenes;
        write_provenance(out_path, "composite", p, {manifest_path}, seed);
        return out_path;
    });
}

std::string stage_texture(const std::string& composite_path,
                          const std::vector<std::string>& band_names, const GlcmParams& params,
                          const std::string& out_path, int workers) {
    require_input(composite_path, "composite");
    return guard_outputs({out_path}, [&] {
        Raster composite = read_raster(composite_path);
        const RasterBand* mask =
            composite.has_band("valid") ? &composite.band("valid") : nullptr;
        Raster out;
        out.grid = composite.grid;
        for (const auto& name : band_names) {
            const RasterBand& band = composite.band(name);
            out.bands.push_back(savg_map(composite.grid, band, mask, params, 256, workers));
        }
        write_raster(out_path, out);
        json p;
        p["levels"] = params.levels;
        p["radius"] = params.radius;
        p["offsets"] = params.offsets;
        p["symmetric"] = params.symmetric;
        p["bands"] = band_names;
        write_provenance(out_path, "texture", p, {composite_path}, 0);
        return out_path;
    });
}

std::string stage_indices_annual(const std::string& manifest_path, IndexKind kind,
                                 const QaSpec& qa, int year, const std::string& out_path,
                                 int workers) {
    require_input(manifest_path, "synth (or manifest preparation)");
    return guard_outputs({out_path}, [&] {
        SceneManifest manifest = load_manifest(manifest_path);
        RasterBand band = annual_index_median(manifest, kind, qa, year, workers);
        Raster out;
        // Grid comes from the first optical scene.
        for (const auto& e : manifest.entries) {
            if (is_optical(e.sensor)) {
                out.grid = read_raster(e.path).grid;
                break;
            }
        }
        out.bands.push_back(std::move(band));
        write_raster(out_path, out);
        json p;
        p["index"] = index_kind_name(kind);
        p["year"] = year;
        p["qa_cloud_bits"] = qa.cloud_bits;
        write_provenance(out_path, "indices", p, {manifest_path}, 0);
        return out_path;
    });
}

std::string stage_indices_series(const std::string& manifest_path, IndexKind kind,
                                 const QaSpec& qa, int window_days, int min_obs,
                                 const std::string& out_dir, int tile, int workers) {
    require_input(manifest_path, "synth (or manifest preparation)");
    return guard_outputs({out_dir}, [&] {
        SceneManifest manifest = load_manifest(manifest_path);
        SeriesTable table = assemble_series_all(manifest, kind, qa);
        write_series_store(out_dir, table, window_days, min_obs, tile, workers);
        json p;
        p["index"] = index_kind_name(kind);
        p["window_days"] = window_days;
        p["min_obs"] = min_obs;
        write_provenance(out_dir + "/meta.json", "indices", p, {manifest_path}, 0);
        return out_dir;
    });
}

namespace {

void write_samples_csv(const std::string& path, int cell_id,
                       const std::vector<FeatureSample>& samples, const std::vector<int>& assign) {
    std::ofstream out(path);
    out << "cell_id,cluster_id,row,col";
    for (const char* f : kFeatureNames) out << "," << f;
    out << "\n";
    for (size_t i = 0; i < samples.size(); ++i) {
        out << cell_id << "," << assign[i] << "," << samples[i].row << "," << samples[i].col;
        for (int f = 0; f < kNumFeatures; ++f) out << "," << fmt_double(samples[i].features[f]);
        out << "\n";
    }
}

}  // namespace

ClassifyFitResult stage_classify_fit(const std::string& composite_path,
                                     const std::string& textures_path,
                                     const ClassifyConfig& config, uint64_t seed,
                                     const std::string& models_dir, int workers) {
    require_input(composite_path, "composite");
    require_input(textures_path, "texture");
    return guard_outputs({models_dir}, [&]() -> ClassifyFitResult {
        fs::create_directories(models_dir);
        Raster composite = read_raster(composite_path);
        Raster textures = read_raster(textures_path);
        FeatureStack stack = build_feature_stack(composite, textures);
        auto cells = partition_grids(grid_bbox(stack.grid), config.cell_side);

        std::vector<int> fitted(cells.size(), 0);
        std::vector<std::string> notes(cells.size());
        std::ofstream stats(models_dir + "/cluster_stats.csv");
        stats << "cell_id,cluster_id,count";
        for (const char* f : kFeatureNames) stats << ",mean_" << f;
        stats << "\n";

        std::vector<std::string> stat_rows(cells.size());
        parallel_for(cells.size(), workers, [&](size_t ci) {
            const GridCell& cell = cells[ci];
            std::vector<FeatureSample> samples;
            try {
                samples = sample_features(cell, stack, config.n_samples, seed);
            } catch (const std::runtime_error& e) {
                notes[ci] = e.what();  // empty cell: no data under this grid cell
                return;
            }
            ClusterModel model = fit_kmeans_auto(samples, config.kmeans, seed, cell.cell_id);
            save_model(models_dir + "/model_" + std::to_string(cell.cell_id) + ".json", model);
            std::vector<int> assign = assign_samples(model, samples);
            write_samples_csv(models_dir + "/samples_" + std::to_string(cell.cell_id) + ".csv",
                              cell.cell_id, samples, assign);

            std::ostringstream rows;
            for (int c = 0; c < model.k; ++c) {
                double sums[kNumFeatures] = {0};
                int64_t count = 0;
                for (size_t i = 0; i < samples.size(); ++i) {
                    if (assign[i] != c) continue;
                    ++count;
                    for (int f = 0; f < kNumFeatures; ++f) sums[f] += samples[i].features[f];
                }
                rows << cell.cell_id << "," << c << "," << count;
                for (int f = 0; f < kNumFeatures; ++f)
                    rows << "," << fmt_double(count ? sums[f] / count : 0.0);
                rows << "\n";
            }
            stat_rows[ci] = rows.str();
            fitted[ci] = 1;
        });
        for (const auto& r : stat_rows) stats << r;
        stats.close();

        json cells_json = json::array();
        ClassifyFitResult result;
        result.models_dir = models_dir;
        for (size_t ci = 0; ci < cells.size(); ++ci) {
            json c = {{"cell_id", cells[ci].cell_id},
                      {"lon_min", cells[ci].lon_min},
                      {"lat_min", cells[ci].lat_min},
                      {"side", cells[ci].side},
                      {"fitted", fitted[ci] == 1}};
            if (!notes[ci].empty()) c["note"] = notes[ci];
            cells_json.push_back(c);
            if (fitted[ci]) result.cell_ids.push_back(cells[ci].cell_id);
        }
        if (result.cell_ids.empty())
            throw std::runtime_error("no grid cell contained valid samples");
        std::ofstream cf(models_dir + "/cells.json");
        cf << json{{"cells", cells_json}}.dump(2) << "\n";

        json p;
        p["cell_side"] = config.cell_side;
        p["n_samples"] = config.n_samples;
        p["k_min"] = config.kmeans.k_min;
        p["k_max"] = config.kmeans.k_max;
        p["n_cells_fitted"] = result.cell_ids.size();
        write_provenance(models_dir + "/cells.json", "classify-fit", p,
                         {composite_path, textures_path}, seed);
        return result;
    });
}

namespace {

std::vector<int> fitted_cell_ids(const std::string& models_dir) {
    std::ifstream in(models_dir + "/cells.json");
    if (!in) throw StageError("classify fit", "missing '" + models_dir + "/cells.json'");
    json j = json::parse(in);
    std::vector<int> ids;
    for (const auto& c : j.at("cells"))
        if (c.at("fitted").get<bool>()) ids.push_back(c.at("cell_id").get<int>());
    return ids;
}

}  // namespace

std::string stage_classify_label_from_truth(const std::string& models_dir,
                                            const std::string& truth_path, double min_fraction,
                                            const std::string& out_csv) {
    require_input(truth_path, "synth (truth raster)");
    auto ids = fitted_cell_ids(models_dir);
    return guard_outputs({out_csv}, [&] {
        Raster truth = read_raster(truth_path, Unit::Flag);
        const RasterBand& tb = truth.bands.front();
        LabelTable table;
        for (int cell_id : ids) {
            ClusterModel model = load_model(models_dir + "/model_" + std::to_string(cell_id) + ".json");
            std::vector<int64_t> palm_count(model.k, 0), total(model.k, 0);
            std::ifstream in(models_dir + "/samples_" + std::to_string(cell_id) + ".csv");
            if (!in) throw std::runtime_error("missing samples CSV for cell " + std::to_string(cell_id));
            std::string line;
            std::getline(in, line);  // header
            while (std::getline(in, line)) {
                if (line.empty()) continue;
                std::stringstream ss(line);
                std::string tok;
                std::getline(ss, tok, ',');  // cell_id
                std::getline(ss, tok, ',');
                int cluster = std::stoi(tok);
                std::getline(ss, tok, ',');
                int row = std::stoi(tok);
                std::getline(ss, tok, ',');
                int col = std::stoi(tok);
                ++total[cluster];
                size_t i = static_cast<size_t>(row) * truth.grid.width + col;
                if (tb.values[i] == 1.0f) ++palm_count[cluster];
            }
            for (int c = 0; c < model.k; ++c) {
                bool palm = total[c] > 0 &&
                            static_cast<double>(palm_count[c]) / static_cast<double>(total[c]) >=
                                min_fraction;
                table.oilpalm[{cell_id, c}] = palm;
            }
        }
        save_label_table(out_csv, table);
        write_provenance(out_csv, "classify-label", {{"min_fraction", min_fraction}},
                         {truth_path}, 0);
        return out_csv;
    });
}

std::vector<std::string> stage_classify_predict(const std::string& models_dir,
                                                const std::string& composite_path,
                                                const std::string& textures_path,
                                                const std::string& classes_dir, int workers) {
    require_input(composite_path, "composite");
    require_input(textures_path, "texture");
    auto ids = fitted_cell_ids(models_dir);
    return guard_outputs({classes_dir}, [&] {
        fs::create_directories(classes_dir);
        Raster composite = read_raster(composite_path);
        Raster textures = read_raster(textures_path);
        FeatureStack stack = build_feature_stack(composite, textures);

        std::vector<std::string> outputs(ids.size());
        // Parallelism lives inside predict_map; models run sequentially so
        // memory stays bounded.
        for (size_t i = 0; i < ids.size(); ++i) {
            ClusterModel model = load_model(models_dir + "/model_" + std::to_string(ids[i]) + ".json");
            RasterBand band = predict_map(model, stack, 256, workers);
            Raster out;
            out.grid = stack.grid;
            out.bands.push_back(std::move(band));
            std::string path = classes_dir + "/class_" + std::to_string(ids[i]) + ".tif";
            write_raster(path, out);
            write_provenance(path, "classify-predict", {{"cell_id", ids[i]}, {"k", model.k}},
                             {composite_path, textures_path}, model.seed);
            outputs[i] = path;
        }
        return outputs;
    });
}

std::string stage_classify_vote(const std::string& classes_dir, const std::string& labels_csv,
                                int threshold, const std::string& out_path) {
    require_input(labels_csv, "classify label (or supply a label CSV)");
    return guard_outputs({out_path}, [&] {
        LabelTable labels = load_label_table(labels_csv);
        std::vector<int> ids;
        for (const auto& entry : fs::directory_iterator(classes_dir)) {
            std::string name = entry.path().filename().string();
            if (name.rfind("class_", 0) == 0 && name.find(".tif") != std::string::npos &&
                name.find(".prov") == std::string::npos)
                ids.push_back(std::stoi(name.substr(6)));
        }
        std::sort(ids.begin(), ids.end());
        if (ids.empty()) throw StageError("classify predict", "no class maps in '" + classes_dir + "'");

        std::vector<RasterBand> binary;
        GridGeometry grid;
        std::vector<std::string> inputs;
        for (int cell_id : ids) {
            std::string path = classes_dir + "/class_" + std::to_string(cell_id) + ".tif";
            Raster r = read_raster(path);
            grid = r.grid;
            binary.push_back(apply_labels(r.bands.front(), labels, cell_id));
            inputs.push_back(path);
        }
        RasterBand voted = majority_vote(binary, threshold);
        Raster out;
        out.grid = grid;
        out.bands.push_back(std::move(voted));
        write_raster(out_path, out);
        inputs.push_back(labels_csv);
        write_provenance(out_path, "classify-vote",
                         {{"threshold", threshold}, {"n_maps", ids.size()}}, inputs, 0);
        return out_path;
    });
}

std::string stage_postproc(const std::string& voted_path, const std::string& ndvi_path,
                           const PostprocConfig& config, const std::string& out_path) {
    require_input(voted_path, "classify vote");
    require_input(ndvi_path, "indices");
    return guard_outputs({out_path}, [&] {
        Raster voted = read_raster(voted_path, Unit::Flag);
        Raster ndvi_r = read_raster(ndvi_path, Unit::Index);
        if (!(voted.grid == ndvi_r.grid))
            throw std::runtime_error("postproc: NDVI grid does not match the voted map");
        const GridGeometry& grid = voted.grid;
        const RasterBand& ndvi_b = ndvi_r.bands.front();

        RasterBand mask = ndvi_filter(voted.bands.front(), ndvi_b, config.ndvi_floor);

        std::vector<Raster> exclude_rasters;
        std::vector<const RasterBand*> excludes;
        std::vector<std::string> inputs{voted_path, ndvi_path};
        for (const auto& path : config.excludes) {
            require_input(path, "postproc (exclusion mask input)");
            exclude_rasters.push_back(read_raster(path, Unit::Flag));
            inputs.push_back(path);
        }
        for (const auto& r : exclude_rasters) excludes.push_back(&r.bands.front());
        if (!excludes.empty()) {
            RasterBand excluded = union_mask(grid.size(), excludes);
            for (size_t i = 0; i < mask.values.size(); ++i)
                if (mask.values[i] == 1.0f && excluded.values[i] == 1.0f) mask.values[i] = 0.0f;
        }

        mask = majority_fill(mask, grid.width, grid.height);

        if (!config.dem.empty()) {
            require_input(config.dem, "postproc (DEM input)");
            inputs.push_back(config.dem);
            Raster dem = read_raster(config.dem, Unit::Meters);
            if (!(dem.grid == grid))
                throw std::runtime_error("postproc: DEM grid does not match the voted map");
            RasterBand slope =
                slope_deg(dem.bands.front(), grid.width, grid.height,
                          std::abs(grid.px_size_x) * config.meters_per_unit,
                          std::abs(grid.px_size_y) * config.meters_per_unit);
            // Steep pixels get one extra gap-fill pass instead of removal.
            std::vector<uint8_t> steep(grid.size(), 0);
            bool any = false;
            for (size_t i = 0; i < steep.size(); ++i) {
                if (!slope.is_nodata(slope.values[i]) &&
                    slope.values[i] > config.slope_fill_threshold_deg) {
                    steep[i] = 1;
                    any = true;
                }
            }
            if (any) mask = majority_fill_where(mask, grid.width, grid.height, steep);
        }

        mask = ndvi_filter(mask, ndvi_b, config.ndvi_floor);
        mask = enforce_mmu(mask, grid.width, grid.height,
                           grid.pixel_area() * config.meters_per_unit * config.meters_per_unit,
                           config.mmu_m2);

        mask.name = "oilpalm";
        Raster out;
        out.grid = grid;
        out.bands.push_back(std::move(mask));
        write_raster(out_path, out);
        json p;
        p["ndvi_floor"] = config.ndvi_floor;
        p["mmu_m2"] = config.mmu_m2;
        p["slope_fill_threshold_deg"] = config.slope_fill_threshold_deg;
        p["meters_per_unit"] = config.meters_per_unit;
        write_provenance(out_path, "postproc", p, inputs, 0);
        return out_path;
    });
}

AgeOutputs stage_age(const std::string& extent_path, const std::string& series_dir,
                     const std::string& loss_path, const AgeConfig& config,
                     const std::string& out_dir, int workers) {
    require_input(extent_path, "postproc");
    require_input(series_dir + "/meta.json", "indices");
    fs::create_directories(out_dir);
    AgeOutputs outputs;
    outputs.closure_path = out_dir + "/closure_year.tif";
    outputs.age_class_path = out_dir + "/age_class.tif";
    outputs.expansion_csv = out_dir + "/expansion.csv";
    std::vector<std::string> out_paths{outputs.closure_path, outputs.age_class_path,
                                       outputs.expansion_csv};
    if (!loss_path.empty()) {
        outputs.consistency_csv = out_dir + "/consistency.csv";
        out_paths.push_back(outputs.consistency_csv);
    }

    return guard_outputs(out_paths, [&]() -> AgeOutputs {
        Raster extent = read_raster(extent_path, Unit::Flag);
        SeriesStore store = open_series_store(series_dir);
        if (!(store.grid == extent.grid))
            throw std::runtime_error("age: series store grid does not match the extent map");
        const GridGeometry& grid = extent.grid;
        const RasterBand& ext = extent.bands.front();
        auto tiles = iter_tiles(grid, store.tile, 0);

        // Threshold: explicit, or the nearest-rank percentile of reference-
        // year monthly BSI values over the mapped extent (merged in tile
        // order so worker count cannot affect the result).
        double threshold = config.threshold;
        if (config.auto_threshold) {
            std::vector<std::vector<float>> partial(tiles.size());
            parallel_for(tiles.size(), workers, [&](size_t ti) {
                const TileWindow& t = tiles[ti];
                int w, h;
                auto block = read_series_block(store, t.x0 / store.tile, t.y0 / store.tile, &w, &h);
                const int base = month_index(store.start_year, 1);
                const int m0 = month_index(config.ref_year, 1) - base;
                for (int r = 0; r < h; ++r) {
                    for (int c = 0; c < w; ++c) {
                        size_t gi = static_cast<size_t>(t.y0 + r) * grid.width + (t.x0 + c);
                        if (ext.values[gi] != 1.0f) continue;
                        const float* months =
                            block.data() + (static_cast<size_t>(r) * w + c) * store.n_months;
                        for (int m = m0; m < m0 + 12 && m < store.n_months; ++m) {
                            if (m >= 0 && !std::isnan(months[m])) partial[ti].push_back(months[m]);
                        }
                    }
                }
            });
            std::vector<float> all;
            for (const auto& p : partial) all.insert(all.end(), p.begin(), p.end());
            threshold = calibrate_threshold(all, config.percentile);
        }

        RasterBand closure = make_band("closure_year", Unit::Year, grid.size(), kClosureNodata,
                                       kClosureNodata);
        RasterBand age_cls = make_band("age_class", Unit::ClassId, grid.size(), 0.0f, 0.0f);

        parallel_for(tiles.size(), workers, [&](size_t ti) {
            const TileWindow& t = tiles[ti];
            int w, h;
            auto block = read_series_block(store, t.x0 / store.tile, t.y0 / store.tile, &w, &h);
            for (int r = 0; r < h; ++r) {
                for (int c = 0; c < w; ++c) {
                    size_t gi = static_cast<size_t>(t.y0 + r) * grid.width + (t.x0 + c);
                    if (ext.values[gi] != 1.0f) continue;
                    MonthlySeries series =
                        monthly_from_block(store, block, static_cast<int>(r) * w + c);
                    ClosureResult res =
                        detect_closure(series, threshold, config.ref_year, config.min_months);
                    closure.values[gi] = static_cast<float>(closure_sentinel(res));
                    auto info = age_of(res, config.ref_year, config.closure_age_offset,
                                       config.archive_start_year);
                    if (info) age_cls.values[gi] = static_cast<float>(static_cast<int>(info->cls) + 1);
                }
            }
        });

        Raster closure_r;
        closure_r.grid = grid;
        closure_r.bands.push_back(closure);
        write_raster(outputs.closure_path, closure_r);
        Raster age_r;
        age_r.grid = grid;
        age_r.bands.push_back(age_cls);
        write_raster(outputs.age_class_path, age_r);

        RasterBand all_ones = make_band("all", Unit::Flag, grid.size(), 1.0f);
        auto expansion = expansion_series(closure, all_ones, grid.pixel_area());
        {
            std::ofstream out(outputs.expansion_csv);
            out << "region,year,hectares\n";
            for (const auto& [year, ha] : expansion)
                out << "ALL," << year << "," << fmt_double(ha) << "\n";
        }

        std::vector<std::string> inputs{extent_path, series_dir + "/meta.json"};
        if (!loss_path.empty()) {
            require_input(loss_path, "synth (loss-year raster)");
            inputs.push_back(loss_path);
            Raster loss = read_raster(loss_path, Unit::Year);
            LossSummary summary = crosscheck_loss_map(closure, loss.bands.front());
            std::ofstream out(outputs.consistency_csv);
            out << "status,count\n";
            out << "CONSISTENT," << summary.consistent << "\n";
            out << "EARLY_CLOSURE," << summary.early_closure << "\n";
            out << "NO_LOSS_RECORD," << summary.no_loss_record << "\n";
        }

        json p;
        p["ref_year"] = config.ref_year;
        p["threshold"] = threshold;
        p["auto_threshold"] = config.auto_threshold;
        p["percentile"] = config.percentile;
        p["closure_age_offset"] = config.closure_age_offset;
        p["min_months"] = config.min_months;
        for (const auto& path : out_paths) write_provenance(path, "age", p, inputs, 0);
        outputs.threshold_used = threshold;
        return outputs;
    });
}

ValidateOutputs stage_validate(const std::string& extent_path, const ValidateConfig& config,
                               const std::string& out_dir, uint64_t seed) {
    require_input(extent_path, "postproc");
    fs::create_directories(out_dir);
    ValidateOutputs outputs;
    outputs.samples_csv = out_dir + "/samples.csv";
    std::vector<std::string> out_paths{outputs.samples_csv};
    if (!config.interpretations.empty()) {
        outputs.report_csv = out_dir + "/accuracy.csv";
        out_paths.push_back(outputs.report_csv);
    }

    return guard_outputs(out_paths, [&]() -> ValidateOutputs {
        Raster extent = read_raster(extent_path, Unit::Flag);
        const RasterBand& ext = extent.bands.front();
        auto strata = stratified_sample(extent.grid, ext, nullptr, 0, config.n_total,
                                        config.allocation, seed);
        {
            std::ofstream out(outputs.samples_csv);
            out << "location_id,row,col,stratum\n";
            int64_t id = 0;
            for (const auto& s : strata) {
                for (const auto& [row, col] : s.locations) {
                    out << id++ << "," << row << "," << col << ","
                        << (s.stratum == Stratum::MAPPED_PALM ? "MAPPED_PALM" : "MAPPED_OTHER")
                        << "\n";
                }
            }
        }
        write_provenance(outputs.samples_csv, "validate",
                         {{"n_total", config.n_total},
                          {"allocation", config.allocation == Allocation::EQUAL ? "equal" : "proportional"}},
                         {extent_path}, seed);

        if (config.interpretations.empty()) return outputs;

        require_input(config.interpretations, "interpretation collection (external CSV)");
        // location_id,row,col,stratum,vote with one row per vote.
        struct Loc {
            int row, col;
            Stratum stratum;
            Interpretation interp;
        };
        std::map<int64_t, Loc> locs;
        {
            std::ifstream in(config.interpretations);
            std::string line;
            std::getline(in, line);
            int lineno = 1;
            while (std::getline(in, line)) {
                ++lineno;
                if (line.empty()) continue;
                std::stringstream ss(line);
                std::string id_s, row_s, col_s, stratum_s, vote_s;
                if (!std::getline(ss, id_s, ',') || !std::getline(ss, row_s, ',') ||
                    !std::getline(ss, col_s, ',') || !std::getline(ss, stratum_s, ',') ||
                    !std::getline(ss, vote_s, ','))
                    throw std::runtime_error(config.interpretations + ":" + std::to_string(lineno) +
                                             ": expected location_id,row,col,stratum,vote");
                while (!vote_s.empty() && (vote_s.back() == '\r' || vote_s.back() == ' '))
                    vote_s.pop_back();
                int64_t id = std::stoll(id_s);
                Loc& loc = locs[id];
                loc.row = std::stoi(row_s);
                loc.col = std::stoi(col_s);
                loc.stratum = stratum_s == "MAPPED_PALM" ? Stratum::MAPPED_PALM : Stratum::MAPPED_OTHER;
                loc.interp.location_id = id;
                Vote v;
                if (vote_s == "palm") v = Vote::PALM;
                else if (vote_s == "not_palm") v = Vote::NOT_PALM;
                else if (vote_s == "unsure") v = Vote::UNSURE;
                else throw std::runtime_error(config.interpretations + ":" + std::to_string(lineno) +
                                              ": vote must be palm|not_palm|unsure");
                loc.interp.votes.push_back(v);
            }
        }

        std::vector<bool> ref, map;
        StratumCounts palm_counts, other_counts;
        for (const auto& [id, loc] : locs) {
            RefLabel label = aggregate_votes(loc.interp);
            if (label == RefLabel::UNDECIDED) continue;
            bool is_palm_ref = label == RefLabel::PALM;
            bool is_palm_map =
                ext.values[static_cast<size_t>(loc.row) * extent.grid.width + loc.col] == 1.0f;
            ref.push_back(is_palm_ref);
            map.push_back(is_palm_map);
            StratumCounts& sc = loc.stratum == Stratum::MAPPED_PALM ? palm_counts : other_counts;
            ++sc.n;
            if (is_palm_ref) ++sc.palm;
        }
        ConfusionMatrix cm = confusion(ref, map);
        IntervalEstimate ba = balanced_accuracy_ci(cm);

        // Stratum weights from the map itself; region area from the grid.
        int64_t n_palm_px = 0, n_valid_px = 0;
        for (size_t i = 0; i < ext.values.size(); ++i) {
            if (ext.is_nodata(ext.values[i])) continue;
            ++n_valid_px;
            if (ext.values[i] == 1.0f) ++n_palm_px;
        }
        double w_palm = static_cast<double>(n_palm_px) / static_cast<double>(n_valid_px);
        double region_area_ha = static_cast<double>(n_valid_px) * extent.grid.pixel_area() / 10000.0;
        IntervalEstimate area;
        bool have_area = palm_counts.n >= 2 && other_counts.n >= 2;
        if (have_area)
            area = adjusted_area_ci({palm_counts, other_counts}, {w_palm, 1.0 - w_palm},
                                    region_area_ha);

        std::ofstream out(outputs.report_csv);
        out << "metric,value,ci_lo,ci_hi\n";
        out << "balanced_accuracy," << fmt_double(ba.value) << "," << fmt_double(ba.lo) << ","
            << fmt_double(ba.hi) << "\n";
        out << "tp," << cm.tp << ",,\n";
        out << "fp," << cm.fp << ",,\n";
        out << "fn," << cm.fn << ",,\n";
        out << "tn," << cm.tn << ",,\n";
        if (have_area)
            out << "adjusted_area_ha," << fmt_double(area.value) << "," << fmt_double(area.lo)
                << "," << fmt_double(area.hi) << "\n";
        out.close();
        write_provenance(outputs.report_csv, "validate", {{"n_locations", locs.size()}},
                         {extent_path, config.interpretations}, seed);
        return outputs;
    });
}

std::string stage_report(const std::string& extent_path, const std::string& closure_path,
                         const ReportConfig& config, const AgeConfig& age,
                         double meters_per_unit, const std::string& out_dir) {
    require_input(extent_path, "postproc");
    require_input(closure_path, "age");
    fs::create_directories(out_dir);
    const std::string stats_csv = out_dir + "/regional_stats.csv";
    const std::string expansion_csv = out_dir + "/expansion_by_region.csv";
    const std::string comparison_csv = out_dir + "/comparison.csv";

    return guard_outputs({stats_csv, expansion_csv, comparison_csv}, [&] {
        Raster extent = read_raster(extent_path, Unit::Flag);
        Raster closure = read_raster(closure_path, Unit::Year);
        const double px_area =
            extent.grid.pixel_area() * meters_per_unit * meters_per_unit;

        std::vector<Raster> mask_rasters;
        std::vector<NamedRegion> regions;
        RasterBand whole = make_band("ALL", Unit::Flag, extent.grid.size(), 1.0f);
        std::vector<std::string> inputs{extent_path, closure_path};
        if (config.regions.empty()) {
            regions.push_back({"ALL", &whole});
        } else {
            mask_rasters.reserve(config.regions.size());
            for (const auto& rc : config.regions) {
                if (rc.mask_path.empty()) {
                    regions.push_back({rc.name, &whole});
                } else {
                    require_input(rc.mask_path, "report (region mask input)");
                    mask_rasters.push_back(read_raster(rc.mask_path, Unit::Flag));
                    regions.push_back({rc.name, &mask_rasters.back().bands.front()});
                    inputs.push_back(rc.mask_path);
                }
            }
        }

        auto stats = regional_stats(extent.bands.front(), closure.bands.front(), regions, px_area,
                                    age.ref_year, age.closure_age_offset, age.archive_start_year);
        {
            std::ofstream out(stats_csv);
            out << "region,total_ha,young_ha,prime_ha,old_ha,young_share,prime_share,old_share,"
                   "mean_age_with_bounds,mean_age_dated_only\n";
            for (const auto& s : stats) {
                out << s.region << "," << fmt_double(s.total_ha) << "," << fmt_double(s.young_ha)
                    << "," << fmt_double(s.prime_ha) << "," << fmt_double(s.old_ha) << ","
                    << fmt_double(s.young_share) << "," << fmt_double(s.prime_share) << ","
                    << fmt_double(s.old_share) << ",";
                if (s.mean_age_with_bounds) out << fmt_double(*s.mean_age_with_bounds);
                out << ",";
                if (s.mean_age_dated_only) out << fmt_double(*s.mean_age_dated_only);
                out << "\n";
            }
        }

        {
            std::ofstream out(expansion_csv);
            out << "region,year,hectares\n";
            for (const auto& region : regions) {
                auto expansion = expansion_series(closure.bands.front(), *region.mask, px_area);
                for (const auto& [year, ha] : expansion)
                    out << region.name << "," << year << "," << fmt_double(ha) << "\n";
            }
        }

        {
            std::ofstream out(comparison_csv);
            out << "region,ours_ha,other_ha,intersection_ha,union_ha,agreement\n";
            if (!config.compare.empty()) {
                require_input(config.compare, "comparison product (external raster)");
                inputs.push_back(config.compare);
                Raster other = read_raster(config.compare, Unit::Flag);
                RasterBand aligned = other.grid == extent.grid
                                         ? other.bands.front()
                                         : resample_nearest(other.grid, other.bands.front(),
                                                            extent.grid);
                auto comps = compare_products(extent.bands.front(), aligned, regions, px_area);
                for (const auto& c : comps)
                    out << c.region << "," << fmt_double(c.ours_ha) << "," << fmt_double(c.other_ha)
                        << "," << fmt_double(c.intersection_ha) << "," << fmt_double(c.union_ha)
                        << "," << fmt_double(c.agreement) << "\n";
            }
        }

        json p;
        p["ref_year"] = age.ref_year;
        p["closure_age_offset"] = age.closure_age_offset;
        for (const auto& path : {stats_csv, expansion_csv, comparison_csv})
            write_provenance(path, "report", p, inputs, 0);
        return stats_csv;
    });
}

int run_pipeline(const RunConfig& config, const std::vector<std::string>& stages) {
    auto wants = [&stages](const std::string& name) {
        if (stages.empty()) return true;
        return std::find(stages.begin(), stages.end(), name) != stages.end();
    };
    const int workers = config.workers > 0 ? config.workers : default_workers();
    const std::string& out = config.out_dir;
    fs::create_directories(out);

    std::string manifest = config.manifest;
    if (wants("synth") && !config.synth_spec.empty())
        manifest = stage_synth(config.synth_spec, out + "/synth", workers);
    if (manifest.empty()) manifest = out + "/synth/manifest.json";

    CompositeParams cparams = config.composite;
    cparams.workers = workers;
    if (wants("composite"))
        stage_composite(manifest, config.composite_year, cparams, out, config.seed);

    if (wants("texture"))
        stage_texture(out + "/composite.tif", {"vv_byte", "vh_byte", "diff_byte"}, config.texture,
                      out + "/textures.tif", workers);

    if (wants("indices")) {
        int ndvi_year = config.indices.ndvi_year > 0 ? config.indices.ndvi_year
                                                     : config.composite_year;
        stage_indices_annual(manifest, IndexKind::NDVI, config.indices.qa, ndvi_year,
                             out + "/ndvi.tif", workers);
        // The BSI series store is only built when the archive is present.
        SceneManifest m = load_manifest(manifest);
        bool has_bsi = false;
        for (const auto& e : m.entries) {
            if (is_optical(e.sensor) &&
                std::find(e.bands.begin(), e.bands.end(), "swir1") != e.bands.end())
                has_bsi = true;
        }
        if (has_bsi)
            stage_indices_series(manifest, IndexKind::BSI, config.indices.qa,
                                 config.indices.window_days, config.indices.min_obs,
                                 out + "/series", 256, workers);
    }

    if (wants("classify")) {
        stage_classify_fit(out + "/composite.tif", out + "/textures.tif", config.classify,
                           config.seed, out + "/models", workers);
        std::string labels = config.classify.labels_path;
        if (config.classify.labels_mode == "truth") {
            labels = out + "/labels.csv";
            stage_classify_label_from_truth(out + "/models", config.classify.truth_path,
                                            config.classify.truth_min_fraction, labels);
        } else {
            require_input(labels, "classify label (human-filled CSV)");
        }
        stage_classify_predict(out + "/models", out + "/composite.tif", out + "/textures.tif",
                               out + "/classes", workers);
        stage_classify_vote(out + "/classes", labels, config.classify.vote_threshold,
                            out + "/voted.tif");
    }

    if (wants("postproc"))
        stage_postproc(out + "/voted.tif", out + "/ndvi.tif", config.postproc,
                       out + "/final_extent.tif");

    if (wants("age"))
        stage_age(out + "/final_extent.tif", out + "/series", loss_raster_from_manifest(manifest),
                  config.age, out + "/age", workers);

    if (wants("validate"))
        stage_validate(out + "/final_extent.tif", config.validate, out + "/validate", config.seed);

    if (wants("report"))
        stage_report(out + "/final_extent.tif", out + "/age/closure_year.tif", config.report,
                     config.age, config.postproc.meters_per_unit, out + "/report");

    return 0;
}

}  // namespace palmmap

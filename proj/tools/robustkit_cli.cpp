// robustkit command-line tool: batch robustness measurement, sampling sweeps,
// performance prediction, embedder fine-tuning, and property verification.
//
// Exit codes: 0 success, 1 property/verification failure, 2 usage/IO error.

#include <CLI11.hpp>
#include <json.hpp>

#include <atomic>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <thread>

#include "robustkit/downstream.hpp"
#include "robustkit/enhance.hpp"
#include "robustkit/image_io.hpp"
#include "robustkit/measure.hpp"

namespace fs = std::filesystem;
using json = nlohmann::ordered_json;
using namespace robustkit;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitVerifyFail = 1;
constexpr int kExitUsage = 2;

struct NamedImage {
    std::string id;
    fs::path path;
};

// Sorted list of readable images (.png / .ppm) in a directory; id = stem.
std::vector<NamedImage> list_images(const fs::path& dir) {
    if (!fs::is_directory(dir))
        throw Error("images dir not found: " + dir.string());
    std::vector<NamedImage> out;
    for (const auto& entry : fs::directory_iterator(dir)) {
        if (!entry.is_regular_file()) continue;
        const auto ext = entry.path().extension().string();
        if (ext == ".png" || ext == ".ppm")
            out.push_back({entry.path().stem().string(), entry.path()});
    }
    std::sort(out.begin(), out.end(),
              [](const auto& a, const auto& b) { return a.id < b.id; });
    if (out.empty())
        throw Error("no .png/.ppm images in " + dir.string());
    return out;
}

std::vector<perturb::PerturbationSpec> select_specs(const std::string& flag) {
    std::vector<perturb::PerturbationSpec> specs;
    if (flag == "all") {
        for (auto id : perturb::kAllPerturbations)
            specs.push_back(perturb::PerturbationSpec::defaults(id));
    } else {
        const auto id = perturb::parse_perturb_id(flag);
        if (!id) throw Error("unknown perturbation: " + flag);
        specs.push_back(perturb::PerturbationSpec::defaults(*id));
    }
    return specs;
}

int resolve_threads(int flag_value) {
    if (const char* env = std::getenv("ROBUSTKIT_THREADS")) {
        const int v = std::atoi(env);
        if (v > 0) return v;
    }
    if (flag_value > 0) return flag_value;
    const unsigned hw = std::thread::hardware_concurrency();
    return hw > 0 ? static_cast<int>(hw) : 1;
}

std::string format_param(const std::optional<double>& p) {
    return p ? format_double(*p) : "null";
}

json sampling_json(const metrics::SamplingPlan& plan) {
    return {{"mode", plan.mode == metrics::SamplingMode::EquallySpaced
                         ? "equal"
                         : "random"},
            {"m", plan.m},
            {"seed", plan.seed},
            {"include_identity", plan.include_identity}};
}

json fixed_params_json(const perturb::PerturbationSpec& spec) {
    json fp = json::object();
    for (const auto& [k, v] : spec.fixed_params) fp[k] = v;
    return fp;
}

json record_json(const metrics::RobustnessRecord& rec,
                 const metrics::SamplingPlan& plan,
                 const std::string& embedder_id,
                 const perturb::PerturbationSpec& spec) {
    json params = json::array();
    for (const auto& p : rec.sampled_params) {
        if (p)
            params.push_back(*p);
        else
            params.push_back(nullptr);
    }
    return {{"image_id", rec.image_id},
            {"perturbation", rec.perturbation_id},
            {"sampling", sampling_json(plan)},
            {"params", std::move(params)},
            {"r_cs", rec.r_cs},
            {"r_ed", rec.r_ed},
            {"r_dr", rec.r_dr},
            {"embedder", embedder_id},
            {"fixed_params", fixed_params_json(spec)}};
}

// Run fn(i) for i in [0,n) on up to `threads` workers; deterministic because
// each task writes only its own slot.
void parallel_for(std::size_t n, int threads,
                  const std::function<void(std::size_t)>& fn) {
    const int workers =
        std::max(1, std::min<int>(threads, static_cast<int>(n)));
    if (workers == 1) {
        for (std::size_t i = 0; i < n; ++i) fn(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::vector<std::thread> pool;
    pool.reserve(static_cast<std::size_t>(workers));
    for (int w = 0; w < workers; ++w)
        pool.emplace_back([&] {
            for (std::size_t i = next.fetch_add(1); i < n;
                 i = next.fetch_add(1))
                fn(i);
        });
    for (auto& t : pool) t.join();
}

struct MeasureOptions {
    std::string images_dir;
    std::string out;
    std::string format = "jsonl";
    std::string perturbation = "all";
    int m = 5;
    std::string sampling = "equal";
    std::string embedder = "toy";
    bool no_identity = false;
    std::string dump_perturbed;
    int threads = 0;
    std::int64_t seed = 0;
};

metrics::SamplingPlan make_plan(const MeasureOptions& opt) {
    metrics::SamplingPlan plan;
    plan.mode = opt.sampling == "random" ? metrics::SamplingMode::Random
                                         : metrics::SamplingMode::EquallySpaced;
    plan.m = opt.m;
    plan.seed = opt.seed;
    plan.include_identity = !opt.no_identity;
    return plan;
}

json resolved_config_json(const MeasureOptions& opt,
                          const metrics::SamplingPlan& plan,
                          const std::vector<perturb::PerturbationSpec>& specs) {
    json per_pert = json::object();
    for (const auto& spec : specs) {
        per_pert[perturb::to_string(spec.id)] = {
            {"domain", {spec.a, spec.b}},
            {"fixed_params", fixed_params_json(spec)}};
    }
    return {{"toolkit_version", kToolkitVersion},
            {"images_dir", opt.images_dir},
            {"perturbation", opt.perturbation},
            {"sampling", sampling_json(plan)},
            {"embedder", opt.embedder},
            {"format", opt.format},
            {"perturbations", std::move(per_pert)}};
}

void write_dump(const Image& perturbed, const fs::path& dir,
                const std::string& pert_id, const std::optional<double>& p) {
    fs::create_directories(dir);
    const std::string name = perturbed.id + "_" + pert_id + "_" +
                             (p ? format_double(*p) : "identity") + ".png";
    write_png(perturbed, (dir / name).string());
}

int cmd_measure(const MeasureOptions& opt) {
    const auto plan = make_plan(opt);
    const auto specs = select_specs(opt.perturbation);
    const bool use_store = opt.embedder.rfind("store:", 0) == 0;

    std::unique_ptr<embed::EmbeddingStore> store;
    std::unique_ptr<embed::ToyEmbedder> toy;
    if (use_store) {
        const std::string path = opt.embedder.substr(6);
        if (!fs::is_regular_file(path))
            throw Error("embedding store not found: " + path);
        store = std::make_unique<embed::EmbeddingStore>(
            embed::EmbeddingStore::load(path));
    } else if (opt.embedder == "toy") {
        toy = std::make_unique<embed::ToyEmbedder>();
    } else {
        throw Error("unknown embedder: " + opt.embedder +
                    " (expected toy or store:PATH)");
    }
    const std::string embedder_id = use_store ? store->id() : toy->id();

    const auto images = list_images(opt.images_dir);
    struct Slot {
        std::vector<json> records;
        std::vector<std::string> errors;
    };
    std::vector<Slot> slots(images.size());

    parallel_for(images.size(), resolve_threads(opt.threads), [&](std::size_t i) {
        auto& slot = slots[i];
        Image img;
        if (!use_store) {
            try {
                img = read_image(images[i].path.string());
                img.id = images[i].id;
            } catch (const Error& e) {
                slot.errors.push_back(images[i].id + ": " + e.what());
                return;
            }
        }
        for (const auto& spec : specs) {
            try {
                metrics::RobustnessRecord rec =
                    use_store ? metrics::measure_with_store(images[i].id, spec,
                                                            plan, *store)
                              : metrics::measure(img, spec, plan, *toy,
                                                 opt.seed);
                if (!opt.dump_perturbed.empty() && !use_store) {
                    for (const auto& p : rec.sampled_params) {
                        const auto param =
                            p ? perturb::PerturbParam::of(*p)
                              : perturb::PerturbParam::identity();
                        write_dump(perturb::apply(img, spec, param, opt.seed),
                                   opt.dump_perturbed,
                                   perturb::to_string(spec.id), p);
                    }
                }
                slot.records.push_back(
                    record_json(rec, plan, embedder_id, spec));
            } catch (const Error& e) {
                slot.errors.push_back(images[i].id + " [" +
                                      perturb::to_string(spec.id) +
                                      "]: " + e.what());
            }
        }
    });

    std::ofstream out(opt.out);
    if (!out) throw Error("cannot open output file: " + opt.out);
    const json header = {{"header", resolved_config_json(opt, plan, specs)}};
    if (opt.format == "jsonl") {
        out << header.dump() << "\n";
        for (const auto& slot : slots)
            for (const auto& rec : slot.records) out << rec.dump() << "\n";
    } else if (opt.format == "csv") {
        out << "# " << header.dump() << "\n";
        out << "image_id,perturbation,mode,m,seed,include_identity,params,"
               "r_cs,r_ed,r_dr,embedder\n";
        for (const auto& slot : slots)
            for (const auto& rec : slot.records) {
                std::string params;
                for (const auto& p : rec["params"]) {
                    if (!params.empty()) params += ";";
                    params += p.is_null()
                                  ? "null"
                                  : format_double(p.get<double>());
                }
                out << rec["image_id"].get<std::string>() << ','
                    << rec["perturbation"].get<std::string>() << ','
                    << rec["sampling"]["mode"].get<std::string>() << ','
                    << rec["sampling"]["m"].get<int>() << ','
                    << rec["sampling"]["seed"].get<std::int64_t>() << ','
                    << (rec["sampling"]["include_identity"].get<bool>() ? 1 : 0)
                    << ',' << params << ','
                    << format_double(rec["r_cs"].get<double>()) << ','
                    << format_double(rec["r_ed"].get<double>()) << ','
                    << format_double(rec["r_dr"].get<double>()) << ','
                    << rec["embedder"].get<std::string>() << "\n";
            }
    } else {
        throw Error("unknown format: " + opt.format);
    }

    std::size_t n_errors = 0;
    for (const auto& slot : slots)
        for (const auto& msg : slot.errors) {
            std::cerr << "error: " << msg << "\n";
            ++n_errors;
        }
    if (n_errors > 0) {
        std::cerr << n_errors << " measurement(s) failed; remaining records "
                  << "were written to " << opt.out << "\n";
        return kExitUsage;
    }
    return kExitOk;
}

struct SweepOptions {
    std::string images_dir;
    std::string out;
    std::string perturbation = "gaussian_noise";
    std::vector<int> m_list = {2, 3, 5, 10, 20, 50};
    int threads = 0;
    std::int64_t seed = 0;
};

int cmd_sweep_m(const SweepOptions& opt) {
    const auto specs = select_specs(opt.perturbation);
    const auto named = list_images(opt.images_dir);
    std::vector<Image> images(named.size());
    parallel_for(named.size(), resolve_threads(opt.threads), [&](std::size_t i) {
        images[i] = read_image(named[i].path.string());
        images[i].id = named[i].id;
    });
    embed::ToyEmbedder emb;

    std::ofstream out(opt.out);
    if (!out) throw Error("cannot open output file: " + opt.out);
    out << "# toolkit_version=" << kToolkitVersion << " perturbation="
        << opt.perturbation << " seed=" << opt.seed << "\n";
    out << "m,mode,mean_rdr\n";
    for (int m : opt.m_list) {
        for (const auto mode : {metrics::SamplingMode::EquallySpaced,
                                metrics::SamplingMode::Random}) {
            metrics::SamplingPlan plan;
            plan.mode = mode;
            plan.m = m;
            plan.seed = opt.seed;
            std::vector<double> rdr(images.size() * specs.size());
            parallel_for(rdr.size(), resolve_threads(opt.threads),
                         [&](std::size_t i) {
                             rdr[i] = metrics::measure(
                                          images[i / specs.size()],
                                          specs[i % specs.size()], plan, emb,
                                          opt.seed)
                                          .r_dr;
                         });
            double sum = 0.0;
            for (double v : rdr) sum += v;
            out << m << ','
                << (mode == metrics::SamplingMode::EquallySpaced ? "equal"
                                                                 : "random")
                << ',' << format_double(sum / static_cast<double>(rdr.size()))
                << "\n";
        }
    }
    return kExitOk;
}

struct PredictOptions {
    std::string pairs;
    std::string out;
    std::string quartiles;
    std::int64_t seed = 0;
};

std::vector<std::pair<double, double>> read_pairs_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Error("cannot open pairs file: " + path);
    std::string line;
    if (!std::getline(in, line) ||
        line.rfind("robustness,performance", 0) != 0)
        throw ParseError(path + ": expected header robustness,performance");
    std::vector<std::pair<double, double>> pairs;
    int lineno = 1;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) continue;
        const auto comma = line.find(',');
        if (comma == std::string::npos)
            throw ParseError(path + ":" + std::to_string(lineno) +
                             ": expected two comma-separated numbers");
        try {
            pairs.emplace_back(std::stod(line.substr(0, comma)),
                               std::stod(line.substr(comma + 1)));
        } catch (const std::exception&) {
            throw ParseError(path + ":" + std::to_string(lineno) +
                             ": bad number");
        }
    }
    return pairs;
}

int cmd_predict(const PredictOptions& opt) {
    auto pairs = read_pairs_csv(opt.pairs);
    if (pairs.size() < 4)
        throw TooFewPairs("predict needs >= 4 pairs, got " +
                          std::to_string(pairs.size()));
    // seeded shuffle, then first half trains and second half evaluates
    auto rng = make_rng(SeedHasher().add(opt.seed).value());
    std::shuffle(pairs.begin(), pairs.end(), rng);
    const std::size_t half = pairs.size() / 2;
    std::vector<std::pair<double, double>> train(pairs.begin(),
                                                 pairs.begin() + half);
    std::vector<std::pair<double, double>> test(pairs.begin() + half,
                                                pairs.end());
    const auto model = downstream::fit_linear(train);
    json report = {{"slope", model.slope},
                   {"intercept", model.intercept},
                   {"train_mse", downstream::mse(model, train)},
                   {"test_mse", downstream::mse(model, test)},
                   {"n_train", train.size()},
                   {"n_test", test.size()},
                   {"seed", opt.seed}};
    if (model.degenerate) report["degenerate"] = true;
    std::ofstream out(opt.out);
    if (!out) throw Error("cannot open output file: " + opt.out);
    out << report.dump(2) << "\n";

    if (!opt.quartiles.empty()) {
        const auto groups = downstream::quartile_groups(pairs);
        std::ofstream q(opt.quartiles);
        if (!q) throw Error("cannot open quartiles file: " + opt.quartiles);
        q << "group,mean_robustness,mean_performance,count\n";
        for (std::size_t g = 0; g < groups.size(); ++g)
            q << (g + 1) << ',' << format_double(groups[g].mean_robustness)
              << ',' << format_double(groups[g].mean_performance) << ','
              << groups[g].count << "\n";
    }
    return kExitOk;
}

struct EnhanceOptions {
    std::string images_dir;
    std::string checkpoint;
    std::string history;
    std::string perturbation = "gaussian_noise";
    double lambda = 1.0;
    int epochs = 50;
    double lr = 1e-5;
    int batch_size = 32;
    double probe_fraction = 0.2;
    std::int64_t seed = 0;
    int threads = 0;
};

int cmd_enhance(const EnhanceOptions& opt) {
    const auto specs = select_specs(opt.perturbation);
    if (specs.size() != 1)
        throw Error("enhance needs a single --perturbation, not 'all'");
    const auto named = list_images(opt.images_dir);
    std::vector<Image> images(named.size());
    parallel_for(named.size(), resolve_threads(opt.threads), [&](std::size_t i) {
        images[i] = read_image(named[i].path.string());
        images[i].id = named[i].id;
    });
    // deterministic probe protocol: last ceil(fraction*n) images in id order
    const std::size_t n_probe = std::max<std::size_t>(
        1, static_cast<std::size_t>(
               std::ceil(opt.probe_fraction *
                         static_cast<double>(images.size()))));
    if (n_probe >= images.size())
        throw Error("probe fraction leaves no training images");
    std::vector<Image> probe(images.end() - static_cast<long>(n_probe),
                             images.end());
    images.resize(images.size() - n_probe);

    enhance::EnhanceConfig cfg;
    cfg.lambda = opt.lambda;
    cfg.epochs = opt.epochs;
    cfg.learning_rate = opt.lr;
    cfg.batch_size = opt.batch_size;
    cfg.seed = opt.seed;

    embed::ToyEmbedder fbase;
    auto result = enhance::finetune(enhance::TrainableEmbedder::identity_init(),
                                    fbase, images, specs.front(), cfg, probe);

    const auto& W = result.embedder.weights();
    json w_flat = json::array();
    for (Eigen::Index r = 0; r < W.rows(); ++r)
        for (Eigen::Index c = 0; c < W.cols(); ++c) w_flat.push_back(W(r, c));
    json ckpt = {{"d_out", W.rows()},
                 {"d_raw", W.cols()},
                 {"W", std::move(w_flat)},
                 {"config",
                  {{"lambda", cfg.lambda},
                   {"epochs", cfg.epochs},
                   {"learning_rate", cfg.learning_rate},
                   {"batch_size", cfg.batch_size},
                   {"seed", cfg.seed},
                   {"perturbation", opt.perturbation},
                   {"probe_fraction", opt.probe_fraction},
                   {"toolkit_version", kToolkitVersion}}},
                 {"epoch", cfg.epochs}};
    std::ofstream co(opt.checkpoint);
    if (!co) throw Error("cannot open checkpoint file: " + opt.checkpoint);
    co << ckpt.dump() << "\n";

    std::ofstream ho(opt.history);
    if (!ho) throw Error("cannot open history file: " + opt.history);
    ho << "epoch,l1,l2,total,probe_rdr,probe_cos\n";
    for (const auto& s : result.history)
        ho << s.epoch << ',' << format_double(s.l1) << ','
           << format_double(s.l2) << ',' << format_double(s.total) << ','
           << format_double(s.probe_rdr) << ',' << format_double(s.probe_cos)
           << "\n";
    return kExitOk;
}

struct VerifyOptions {
    std::string images_dir;  // optional; synthetic corpus when empty
    std::int64_t seed = 0;
};

Image synthetic_image(int w, int h, std::uint64_t seed, std::string id) {
    auto rng = make_rng(seed);
    std::uniform_real_distribution<double> uni(0.0, 1.0);
    Image img = Image::constant(w, h, 0.0, std::move(id));
    const double fx = 2.0 + 3.0 * uni(rng), fy = 2.0 + 3.0 * uni(rng);
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x)
            for (int c = 0; c < 3; ++c)
                img.at(y, x, c) = 0.5 + 0.35 * std::sin(fx * x * 0.3 + c) *
                                            std::cos(fy * y * 0.2);
    img.clamp();
    return img;
}

int cmd_verify(const VerifyOptions& opt) {
    std::vector<Image> images;
    if (!opt.images_dir.empty()) {
        for (const auto& named : list_images(opt.images_dir)) {
            images.push_back(read_image(named.path.string()));
            images.back().id = named.id;
        }
        if (images.size() > 4) images.resize(4);
    } else {
        for (int i = 0; i < 3; ++i)
            images.push_back(synthetic_image(
                32, 32, static_cast<std::uint64_t>(opt.seed) + i,
                "synthetic-" + std::to_string(i)));
    }
    std::vector<perturb::PerturbationSpec> specs = {
        perturb::PerturbationSpec::defaults(perturb::PerturbId::Contrast),
        perturb::PerturbationSpec::defaults(perturb::PerturbId::GaussianNoise)};
    embed::ToyEmbedder emb;
    auto report = metrics::property_suite(emb, images, specs);

    // geometry oracle comparison: exact solver vs subset enumeration
    {
        double worst = 0.0;
        auto rng = make_rng(SeedHasher().add(opt.seed).add(7).value());
        std::normal_distribution<double> gauss(0.0, 1.0);
        for (int t = 0; t < 100; ++t) {
            std::uniform_int_distribution<int> un(2, 8), ud(2, 8);
            const int n = un(rng), d = ud(rng);
            std::vector<geometry::Vec> pts;
            for (int i = 0; i < n; ++i) {
                geometry::Vec p(d);
                for (int j = 0; j < d; ++j) p(j) = gauss(rng);
                pts.push_back(p);
            }
            worst = std::max(worst,
                             std::abs(geometry::meb_exact(pts).radius -
                                      geometry::meb_bruteforce(pts).radius));
        }
        report.results.push_back(
            {"meb_oracle_equivalence", worst <= 1e-9, -worst});
    }

    std::cout << "property" << std::string(32 - 8, ' ') << "result    slack\n";
    for (const auto& r : report.results) {
        std::string name = r.name;
        name.resize(32, ' ');
        std::cout << name << (r.pass ? "pass" : "FAIL") << "      "
                  << format_double(r.slack) << "\n";
    }
    return report.all_pass() ? kExitOk : kExitVerifyFail;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"embedding robustness toolkit"};
    app.require_subcommand(1);
    app.set_version_flag("--version", std::string(kToolkitVersion));

    MeasureOptions mo;
    auto* measure = app.add_subcommand(
        "measure", "measure robustness metrics for a directory of images");
    measure->add_option("--images", mo.images_dir, "input image directory")
        ->required();
    measure->add_option("--out", mo.out, "output report path")->required();
    measure->add_option("--format", mo.format, "jsonl or csv")
        ->check(CLI::IsMember({"jsonl", "csv"}));
    measure->add_option("--perturbation", mo.perturbation,
                        "perturbation id or 'all'");
    measure->add_option("--m", mo.m, "samples per domain")
        ->check(CLI::PositiveNumber);
    measure->add_option("--sampling", mo.sampling, "equal or random")
        ->check(CLI::IsMember({"equal", "random"}));
    measure->add_option("--embedder", mo.embedder, "toy or store:PATH");
    measure->add_flag("--no-identity", mo.no_identity,
                      "exclude the identity parameter");
    measure->add_option("--dump-perturbed", mo.dump_perturbed,
                        "write perturbed images as PNG into this directory");
    measure->add_option("--threads", mo.threads,
                        "worker threads (0 = auto; ROBUSTKIT_THREADS wins)");
    measure->add_option("--seed", mo.seed, "seed for sampling/perturbations");

    SweepOptions so;
    auto* sweep = app.add_subcommand(
        "sweep-m", "mean divergence radius vs sample count and mode");
    sweep->add_option("--images", so.images_dir, "input image directory")
        ->required();
    sweep->add_option("--out", so.out, "output CSV path")->required();
    sweep->add_option("--perturbation", so.perturbation,
                      "perturbation id or 'all'");
    sweep->add_option("--m-list", so.m_list, "sample counts to sweep");
    sweep->add_option("--threads", so.threads, "worker threads (0 = auto)");
    sweep->add_option("--seed", so.seed, "seed");

    PredictOptions po;
    auto* predict = app.add_subcommand(
        "predict", "fit a linear performance predictor from robustness pairs");
    predict->add_option("--pairs", po.pairs,
                        "CSV with header robustness,performance")
        ->required();
    predict->add_option("--out", po.out, "prediction report JSON path")
        ->required();
    predict->add_option("--quartiles", po.quartiles,
                        "also write 4-group means CSV to this path");
    predict->add_option("--seed", po.seed, "seed for the half split");

    EnhanceOptions eo;
    auto* enhance = app.add_subcommand(
        "enhance", "fine-tune the trainable embedder for robustness");
    enhance->add_option("--images", eo.images_dir, "input image directory")
        ->required();
    enhance->add_option("--checkpoint", eo.checkpoint, "checkpoint JSON path")
        ->required();
    enhance->add_option("--history", eo.history, "history CSV path")
        ->required();
    enhance->add_option("--perturbation", eo.perturbation,
                        "single perturbation id");
    enhance->add_option("--lambda", eo.lambda, "utility loss weight")
        ->check(CLI::NonNegativeNumber);
    enhance->add_option("--epochs", eo.epochs, "training epochs")
        ->check(CLI::PositiveNumber);
    enhance->add_option("--lr", eo.lr, "learning rate")
        ->check(CLI::PositiveNumber);
    enhance->add_option("--batch-size", eo.batch_size, "mini-batch size")
        ->check(CLI::PositiveNumber);
    enhance->add_option("--probe-fraction", eo.probe_fraction,
                        "held-out probe fraction (id-sorted tail)");
    enhance->add_option("--seed", eo.seed, "seed");
    enhance->add_option("--threads", eo.threads, "worker threads (0 = auto)");

    VerifyOptions vo;
    auto* verify = app.add_subcommand(
        "verify", "run the metric property suite and geometry oracle checks");
    verify->add_option("--images", vo.images_dir,
                       "optional image directory (synthetic corpus if absent)");
    verify->add_option("--seed", vo.seed, "seed");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kExitOk : kExitUsage;
    }

    try {
        if (measure->parsed()) return cmd_measure(mo);
        if (sweep->parsed()) return cmd_sweep_m(so);
        if (predict->parsed()) return cmd_predict(po);
        if (enhance->parsed()) return cmd_enhance(eo);
        if (verify->parsed()) return cmd_verify(vo);
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitUsage;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitUsage;
    }
    return kExitUsage;
}

#include <CLI11.hpp>

#include <chrono>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <set>

#include "pref/analysis.hpp"
#include "pref/annotate.hpp"
#include "pref/binning.hpp"
#include "pref/btl.hpp"
#include "pref/cluster.hpp"
#include "pref/dataset.hpp"
#include "pref/features.hpp"
#include "pref/jsonl.hpp"
#include "pref/manifest.hpp"

namespace fs = std::filesystem;
using namespace pref;

namespace {

struct CommonOpts {
    std::string out_dir = "run";
    std::string timestamp;  // empty -> wall clock
    bool force = false;
};

std::string now_utc() {
    const auto now = std::chrono::system_clock::now();
    const std::time_t t = std::chrono::system_clock::to_time_t(now);
    char buf[32];
    std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", std::gmtime(&t));
    return buf;
}

void add_common(CLI::App* cmd, CommonOpts& opts) {
    cmd->add_option("--out-dir", opts.out_dir, "Run directory for artifacts and manifest")
        ->capture_default_str();
    cmd->add_option("--timestamp", opts.timestamp,
                    "Fixed manifest timestamp (for reproducible runs)");
    cmd->add_flag("--force", opts.force, "Proceed past stale-artifact digest warnings");
    cmd->set_config("--config", "", "Read options from a config file");
}

std::string manifest_path(const CommonOpts& opts) {
    return (fs::path(opts.out_dir) / "manifest.json").string();
}

RunManifest open_manifest(const CommonOpts& opts) {
    fs::create_directories(opts.out_dir);
    RunManifest m = RunManifest::load_or_create(manifest_path(opts));
    m.tool_version = kToolVersion;
    m.timestamp = opts.timestamp.empty() ? now_utc() : opts.timestamp;
    return m;
}

void require_fresh(const RunManifest& m, const CommonOpts& opts, const std::string& path) {
    if (!fs::exists(path)) {
        throw IoError("missing input: " + path + " (run the upstream stage first)");
    }
    std::string message;
    if (!m.check_artifact(path, &message)) {
        if (opts.force) {
            std::cerr << "warning: " << message << " (continuing due to --force)\n";
        } else {
            throw IoError(message + "; rerun the upstream stage or pass --force");
        }
    }
}

Dataset load_run_dataset(const RunManifest& m, const CommonOpts& opts) {
    const fs::path dir(opts.out_dir);
    const std::string p = (dir / "dataset.prompts.jsonl").string();
    const std::string r = (dir / "dataset.responses.jsonl").string();
    const std::string v = (dir / "dataset.votes.jsonl").string();
    require_fresh(m, opts, p);
    require_fresh(m, opts, r);
    require_fresh(m, opts, v);
    return load_dataset(p, r, v);
}

void print_warnings(const std::vector<std::string>& warnings) {
    for (const auto& w : warnings) std::cerr << "warning: " << w << '\n';
}

TransportConfig::Mode parse_mode(const std::string& mode) {
    if (mode == "live") return TransportConfig::Mode::live;
    if (mode == "replay") return TransportConfig::Mode::replay;
    if (mode == "record") return TransportConfig::Mode::record;
    throw CLI::ValidationError("--transport must be live, replay or record");
}

struct TransportOpts {
    std::string mode = "replay";
    std::string cassette;
    std::string endpoint;
    std::string model = "gpt-5.1";
    double temperature = 1.0;
    int max_attempts = 3;
};

void add_transport(CLI::App* cmd, TransportOpts& opts) {
    cmd->add_option("--transport", opts.mode, "Transport mode: live, replay or record")
        ->capture_default_str();
    cmd->add_option("--cassette", opts.cassette, "Cassette file for replay/record mode");
    cmd->add_option("--endpoint", opts.endpoint, "API endpoint for live/record mode");
    cmd->add_option("--model", opts.model, "Model name")->capture_default_str();
    cmd->add_option("--temperature", opts.temperature, "Sampling temperature (default 1.0)")
        ->capture_default_str();
    cmd->add_option("--max-attempts", opts.max_attempts, "Retry budget per request")
        ->capture_default_str();
}

TransportConfig to_config(const TransportOpts& opts) {
    TransportConfig cfg;
    cfg.mode = parse_mode(opts.mode);
    cfg.cassette_path = opts.cassette;
    cfg.endpoint = opts.endpoint;
    cfg.model = opts.model;
    cfg.temperature = opts.temperature;
    cfg.max_attempts = opts.max_attempts;
    return cfg;
}

// ---- stage implementations ----

int cmd_ingest(const CommonOpts& opts, const std::string& prompts, const std::string& responses,
               const std::string& votes, std::int64_t min_user_votes,
               std::int64_t min_response_votes) {
    RunManifest m = open_manifest(opts);
    std::vector<std::string> warnings;
    Dataset d = load_dataset(prompts, responses, votes, &warnings);
    print_warnings(warnings);

    FilterParams params;
    params.min_user_votes = min_user_votes;
    params.min_response_votes = min_response_votes;
    Dataset filtered = filter_dataset(d, params);

    const fs::path dir(opts.out_dir);
    save_dataset(filtered, (dir / "dataset.prompts.jsonl").string(),
                 (dir / "dataset.responses.jsonl").string(),
                 (dir / "dataset.votes.jsonl").string());

    const StatsReport stats = dataset_stats(filtered);
    {
        std::ofstream out(dir / "stats.json");
        nlohmann::json obj = {{"prompts", stats.prompts},
                              {"responses", stats.responses},
                              {"users", stats.users},
                              {"total_votes", stats.total_votes},
                              {"mean_voters_per_prompt", stats.mean_voters_per_prompt}};
        out << obj.dump(2) << '\n';
    }

    m.record_input(prompts);
    m.record_input(responses);
    m.record_input(votes);
    m.config["ingest.min_user_votes"] = std::to_string(min_user_votes);
    m.config["ingest.min_response_votes"] = std::to_string(min_response_votes);
    for (const char* name : {"dataset.prompts.jsonl", "dataset.responses.jsonl",
                             "dataset.votes.jsonl", "stats.json"}) {
        m.record_output((dir / name).string());
    }
    m.save(manifest_path(opts));
    std::cout << "ingest: " << stats.prompts << " prompts, " << stats.responses
              << " responses, " << stats.users << " users, " << stats.total_votes << " votes\n";
    return 0;
}

int cmd_annotate(const CommonOpts& opts, const TransportOpts& topts, int trials) {
    RunManifest m = open_manifest(opts);
    Dataset d = load_run_dataset(m, opts);
    std::vector<std::string> warnings;
    auto labels = annotate_strategies(d, to_config(topts), trials, &warnings);
    print_warnings(warnings);

    const std::string path = (fs::path(opts.out_dir) / "labels.jsonl").string();
    save_labels(labels, path);
    m.config["annotate.trials"] = std::to_string(trials);
    m.config["annotate.model"] = topts.model;
    m.record_output(path);
    m.save(manifest_path(opts));
    std::cout << "annotate: labeled " << labels.size() << " responses\n";
    return 0;
}

int cmd_features(const CommonOpts& opts, const std::string& morph_path,
                 const std::string& labels_path, const std::string& exaggeration_path,
                 const std::string& negation_path) {
    RunManifest m = open_manifest(opts);
    Dataset d = load_run_dataset(m, opts);

    Lexicons lex = Lexicons::defaults();
    if (!exaggeration_path.empty()) lex.exaggeration = Lexicons::load_terms(exaggeration_path);
    if (!negation_path.empty()) lex.negation = Lexicons::load_terms(negation_path);

    std::map<std::string, MorphAnnotation> morph;
    if (!morph_path.empty()) {
        morph = load_morph_annotations(morph_path);
        m.record_input(morph_path);
    }
    std::map<std::string, std::set<FactorId>> labels;
    if (!labels_path.empty()) {
        require_fresh(m, opts, labels_path);
        labels = load_labels(labels_path);
    }

    std::vector<RawFeatureVector> vectors;
    vectors.reserve(d.responses.size());
    for (const auto& r : d.responses) {
        const MorphAnnotation* rm = nullptr;
        const MorphAnnotation* pm = nullptr;
        if (auto it = morph.find(r.response_id); it != morph.end()) rm = &it->second;
        if (auto it = morph.find(r.prompt_id); it != morph.end()) pm = &it->second;
        vectors.push_back(extract_raw_features(d.prompt(r.prompt_id), r, rm, pm, lex));
    }

    std::vector<std::string> warnings;
    BinningModel bins = fit_binning(vectors, opts.out_dir, &warnings);

    std::vector<FactorSet> sets;
    for (std::size_t i = 0; i < d.responses.size(); ++i) {
        const auto& rid = d.responses[i].response_id;
        auto lit = labels.find(rid);
        sets.push_back(apply_binning(vectors[i], bins, rid,
                                     lit == labels.end() ? std::set<FactorId>{} : lit->second,
                                     &warnings));
    }
    print_warnings(warnings);

    const fs::path dir(opts.out_dir);
    save_binning_model(bins, (dir / "binning.json").string());
    save_factor_sets(sets, (dir / "factors.jsonl").string());
    m.record_output((dir / "binning.json").string());
    m.record_output((dir / "factors.jsonl").string());
    m.save(manifest_path(opts));
    std::cout << "features: " << sets.size() << " factor sets, " << bins.features.size()
              << " binned families\n";
    return 0;
}

int cmd_cluster(const CommonOpts& opts, std::size_t dims, int k, std::uint64_t seed,
                int restarts, const std::string& k_range) {
    RunManifest m = open_manifest(opts);
    Dataset d = load_run_dataset(m, opts);

    SparseMatrix votes = build_vote_matrix(d);
    SparseMatrix weighted = tfidf_reweight(votes);
    EmbeddingModel embedding = fit_svd(weighted, dims, seed);
    std::vector<std::string> zero_norm;
    auto points = embed_users(weighted, embedding, &zero_norm);
    for (const auto& u : zero_norm) {
        std::cerr << "warning: user " << u << " has zero-norm embedding; excluded\n";
        points.erase(u);
    }

    const fs::path dir(opts.out_dir);
    if (!k_range.empty()) {
        const auto colon = k_range.find(':');
        if (colon == std::string::npos) {
            throw CLI::ValidationError("--k-range must be <min>:<max>");
        }
        const int k_min = std::stoi(k_range.substr(0, colon));
        const int k_max = std::stoi(k_range.substr(colon + 1));
        KSelectionTable table = select_k(points, k_min, k_max, seed, restarts);
        std::ofstream out(dir / "k_selection.tsv");
        out << "k\tinertia\tsilhouette\n";
        out.precision(17);
        for (const auto& row : table.rows) {
            out << row.k << '\t' << row.inertia << '\t' << row.silhouette << '\n';
        }
        std::cout << "select_k: max-silhouette suggestion k=" << table.suggested_k
                  << " (pick k yourself from k_selection.tsv)\n";
        m.record_output((dir / "k_selection.tsv").string());
    }

    ClusterModel model = kmeans(points, k, seed, restarts);
    save_assignments(model, (dir / "clusters.jsonl").string());

    auto coords = project_2d(points);
    {
        std::ofstream out(dir / "coords_2d.tsv");
        out << "user_id\tx\ty\tcluster\n";
        out.precision(17);
        for (const auto& [id, xy] : coords) {
            out << id << '\t' << xy.first << '\t' << xy.second << '\t' << model.assignments[id]
                << '\n';
        }
    }

    m.config["cluster.dims"] = std::to_string(dims);
    m.config["cluster.k"] = std::to_string(k);
    m.config["cluster.seed"] = std::to_string(seed);
    m.config["cluster.restarts"] = std::to_string(restarts);
    m.record_output((dir / "clusters.jsonl").string());
    m.record_output((dir / "coords_2d.tsv").string());
    m.save(manifest_path(opts));
    std::cout << "cluster: k=" << k << " inertia=" << model.inertia
              << " silhouette=" << model.silhouette << '\n';
    return 0;
}

int cmd_collect_llm(const CommonOpts& opts, const TransportOpts& topts,
                    const std::string& persona_name, int trials, std::int64_t min_candidates,
                    std::uint64_t seed) {
    RunManifest m = open_manifest(opts);
    Dataset d = load_run_dataset(m, opts);

    std::vector<Persona> personas;
    if (persona_name == "all") {
        personas = builtin_personas();
    } else {
        personas.push_back(persona_by_name(persona_name));
    }

    const fs::path dir(opts.out_dir);
    fs::create_directories(dir / "selections");
    fs::create_directories(dir / "llm_votes");
    for (const auto& persona : personas) {
        std::vector<std::string> warnings;
        auto results =
            collect_preferences(d, persona, to_config(topts), trials, min_candidates, seed,
                                &warnings);
        print_warnings(warnings);
        auto votes = selections_to_votes(results, topts.model, persona.name);

        const std::string stem = topts.model + "__" + persona.name;
        const std::string sel_path = (dir / "selections" / (stem + ".jsonl")).string();
        const std::string votes_path = (dir / "llm_votes" / (stem + ".jsonl")).string();
        save_selections(results, sel_path);
        {
            JsonlWriter w(votes_path);
            for (const auto& v : votes) {
                w.write({{"user_id", v.user_id},
                         {"response_id", v.response_id},
                         {"count", v.count}});
            }
        }
        m.record_output(sel_path);
        m.record_output(votes_path);
        std::cout << "collect-llm: " << topts.model << ":" << persona.name << " -> "
                  << votes.size() << " votes over " << results.size() << " trials\n";
    }
    m.config["collect_llm.trials"] = std::to_string(trials);
    m.config["collect_llm.min_candidates"] = std::to_string(min_candidates);
    m.config["collect_llm.seed"] = std::to_string(seed);
    m.save(manifest_path(opts));
    return 0;
}

std::vector<VoteRecord> load_vote_file(const std::string& path) {
    std::vector<VoteRecord> votes;
    for_each_jsonl(path, [&](std::size_t, const nlohmann::json& obj) {
        votes.push_back({obj.at("user_id").get<std::string>(),
                         obj.at("response_id").get<std::string>(),
                         obj.at("count").get<std::int64_t>()});
    });
    return votes;
}

int cmd_btl(const CommonOpts& opts, double alpha, std::int64_t llm_min_candidates) {
    RunManifest m = open_manifest(opts);
    Dataset d = load_run_dataset(m, opts);
    const fs::path dir(opts.out_dir);

    const std::string factors_path = (dir / "factors.jsonl").string();
    require_fresh(m, opts, factors_path);
    auto factorsets = load_factor_sets(factors_path);

    struct Condition {
        std::string id;
        ConditionVotes votes;
    };
    std::vector<Condition> conditions;

    conditions.push_back({"all_users", condition_votes(d, "all_users")});

    const std::string clusters_path = (dir / "clusters.jsonl").string();
    if (fs::exists(clusters_path)) {
        require_fresh(m, opts, clusters_path);
        auto assignments = load_assignments(clusters_path);
        std::map<int, std::set<std::string>> members;
        for (const auto& [user, cluster] : assignments) members[cluster].insert(user);
        for (const auto& [cluster, users] : members) {
            const std::string id = "C" + std::to_string(cluster);
            conditions.push_back({id, condition_votes(d, id, users)});
        }
    }

    // LLM conditions: votes were collected on the >= min_candidates subset,
    // so derive pairs against the same subset.
    if (fs::exists(dir / "llm_votes")) {
        Dataset eligible = restrict_to_eligible_prompts(d, llm_min_candidates);
        std::vector<fs::path> files;
        for (const auto& entry : fs::directory_iterator(dir / "llm_votes")) {
            if (entry.path().extension() == ".jsonl") files.push_back(entry.path());
        }
        std::sort(files.begin(), files.end());
        for (const auto& file : files) {
            std::string id = file.stem().string();
            const auto sep = id.find("__");
            if (sep != std::string::npos) id = id.substr(0, sep) + ":" + id.substr(sep + 2);
            Dataset with_votes = eligible;
            with_votes.votes = load_vote_file(file.string());
            with_votes.validate();
            conditions.push_back({id, condition_votes(with_votes, id)});
        }
    }

    fs::create_directories(dir / "comparisons");
    bool first = true;
    const std::string scores_path = (dir / "scores.tsv").string();
    for (const auto& condition : conditions) {
        auto pairs = derive_response_pairs(condition.votes);
        auto comparisons = derive_factor_comparisons(pairs, factorsets);
        if (comparisons.factor_index.empty()) {
            std::cerr << "warning: condition " << condition.id
                      << " has no informative comparisons; skipped\n";
            continue;
        }
        BtlScores scores = lsr_estimate(comparisons, alpha, condition.id);
        save_comparisons(comparisons,
                         (dir / "comparisons" / (condition.id + ".tsv")).string());
        append_scores(scores, scores_path, first);
        first = false;
        std::cout << "btl: " << condition.id << " estimated " << scores.theta.size()
                  << " factors from " << pairs.size() << " response pairs\n";
    }
    if (first) throw BtlError("no condition produced any comparisons");

    m.config["btl.alpha"] = std::to_string(alpha);
    m.record_output(scores_path);
    m.save(manifest_path(opts));
    return 0;
}

int cmd_report(const CommonOpts& opts, std::size_t rank_k) {
    RunManifest m = open_manifest(opts);
    const fs::path dir(opts.out_dir);
    const std::string scores_path = (dir / "scores.tsv").string();
    require_fresh(m, opts, scores_path);
    auto scores = load_scores(scores_path);

    std::vector<std::pair<std::string, FactorRanking>> rankings;
    std::vector<BtlScores> human, llm;
    for (const auto& s : scores) {
        rankings.emplace_back(s.condition_id, rank_factors(s, rank_k));
        if (s.condition_id.find(':') == std::string::npos) {
            human.push_back(s);
        } else {
            llm.push_back(s);
        }
    }
    std::sort(rankings.begin(), rankings.end(), [](const auto& a, const auto& b) {
        return a.first < b.first;
    });

    ScoreMatrix all_matrix = ScoreMatrix::from_scores(scores);
    save_score_matrix(all_matrix, (dir / "score_matrix.tsv").string());
    save_correlation_matrix(correlation_matrix(all_matrix),
                            (dir / "correlations.tsv").string());
    save_rankings(rankings, (dir / "rankings.tsv").string());
    m.record_output((dir / "score_matrix.tsv").string());
    m.record_output((dir / "correlations.tsv").string());
    m.record_output((dir / "rankings.tsv").string());

    if (!human.empty() && !llm.empty()) {
        // shared vocabulary so correlations compare like with like
        ScoreMatrix human_matrix = ScoreMatrix::from_scores(human);
        ScoreMatrix llm_matrix = ScoreMatrix::from_scores(llm);
        auto shared = all_matrix.factors;
        auto reindex = [&](const ScoreMatrix& src) {
            ScoreMatrix dst;
            dst.conditions = src.conditions;
            dst.factors = shared;
            dst.values.assign(dst.conditions.size(),
                              std::vector<double>(shared.size(),
                                                  std::numeric_limits<double>::quiet_NaN()));
            dst.missing.assign(dst.conditions.size(), std::vector<bool>(shared.size(), true));
            for (std::size_t c = 0; c < src.conditions.size(); ++c) {
                for (std::size_t f = 0; f < src.factors.size(); ++f) {
                    auto it = std::find(shared.begin(), shared.end(), src.factors[f]);
                    const std::size_t j = it - shared.begin();
                    dst.values[c][j] = src.values[c][f];
                    dst.missing[c][j] = src.missing[c][f];
                }
            }
            return dst;
        };
        auto report = alignment_report(reindex(human_matrix), reindex(llm_matrix));
        save_alignment_report(report, (dir / "alignment.tsv").string());
        m.record_output((dir / "alignment.tsv").string());
    }

    m.config["report.rank_k"] = std::to_string(rank_k);
    m.save(manifest_path(opts));
    std::cout << "report: wrote rankings, score matrix, correlations"
              << (!human.empty() && !llm.empty() ? ", alignment" : "") << '\n';
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Vote-based preference factor analysis pipeline"};
    app.require_subcommand(1);

    CommonOpts common;

    // ingest
    std::string in_prompts, in_responses, in_votes;
    std::int64_t min_user_votes = 100, min_response_votes = 3;
    auto* ingest = app.add_subcommand(
        "ingest", "Load and filter exported vote logs into the run directory");
    add_common(ingest, common);
    ingest->add_option("--prompts", in_prompts, "Prompts file (jsonl)")->required();
    ingest->add_option("--responses", in_responses, "Responses file (jsonl)")->required();
    ingest->add_option("--votes", in_votes, "Votes file (jsonl)")->required();
    ingest->add_option("--min-user-votes", min_user_votes,
                       "Drop users with fewer total votes (default 100)")
        ->capture_default_str();
    ingest->add_option("--min-response-votes", min_response_votes,
                       "Drop responses with fewer votes after the user filter (default 3)")
        ->capture_default_str();

    // annotate
    TransportOpts annotate_transport;
    int annotate_trials = 3;
    auto* annotate = app.add_subcommand(
        "annotate", "Strategy labeling via self-consistency over repeated completions");
    add_common(annotate, common);
    add_transport(annotate, annotate_transport);
    annotate->add_option("--trials", annotate_trials,
                         "Completions per batch for majority voting (odd, default 3)")
        ->capture_default_str();

    // features
    std::string morph_path, labels_path, exa_path, neg_path;
    auto* features = app.add_subcommand(
        "features", "Extract linguistic features, fit bins, emit factor sets");
    add_common(features, common);
    features->add_option("--morph", morph_path,
                         "Precomputed morphological annotations (jsonl, optional)");
    features->add_option("--labels", labels_path, "Strategy labels file (jsonl, optional)");
    features->add_option("--exaggeration-lexicon", exa_path,
                         "Exaggeration term list (one per line)");
    features->add_option("--negation-lexicon", neg_path, "Negation term list (one per line)");

    // cluster
    std::size_t dims = 100;
    int cluster_k = 7, restarts = 10;
    std::uint64_t cluster_seed = 0;
    std::string k_range;
    bool seed_set = false;
    auto* cluster = app.add_subcommand(
        "cluster", "Vote matrix -> TF-IDF -> truncated SVD -> unit norm -> k-means");
    add_common(cluster, common);
    cluster->add_option("--dims", dims, "Embedding dimensionality (default 100)")
        ->capture_default_str();
    cluster->add_option("--k", cluster_k, "Cluster count")->capture_default_str();
    cluster->add_option("--seed", cluster_seed, "Random seed (required; no wall-clock default)")
        ->required();
    cluster->add_option("--restarts", restarts, "k-means restarts (default 10)")
        ->capture_default_str();
    cluster->add_option("--k-range", k_range,
                        "Also emit an elbow/silhouette table over <min>:<max>");
    (void)seed_set;

    // collect-llm
    TransportOpts collect_transport;
    std::string persona_name = "no_persona";
    int collect_trials = 3;
    std::int64_t min_candidates = 5;
    std::uint64_t collect_seed = 0;
    bool collect_seed_given = false;
    auto* collect = app.add_subcommand(
        "collect-llm", "Funniest-response selection per persona, exported as synthetic votes");
    add_common(collect, common);
    add_transport(collect, collect_transport);
    collect->add_option("--persona", persona_name, "Persona name or \"all\"")
        ->capture_default_str();
    collect->add_option("--trials", collect_trials,
                        "Selection trials per prompt with permuted order (default 3)")
        ->capture_default_str();
    collect->add_option("--min-candidates", min_candidates,
                        "Skip prompts with fewer responses (default 5)")
        ->capture_default_str();
    collect->add_option("--seed", collect_seed, "Permutation seed (required)")
        ->required()
        ->each([&](const std::string&) { collect_seed_given = true; });
    (void)collect_seed_given;

    // btl
    double alpha = 0.01;
    std::int64_t btl_min_candidates = 5;
    auto* btl = app.add_subcommand(
        "btl", "Factor-level pairwise outcomes and spectral score estimation per condition");
    add_common(btl, common);
    btl->add_option("--alpha", alpha, "Pseudo-count regularization (default 0.01)")
        ->capture_default_str();
    btl->add_option("--llm-min-candidates", btl_min_candidates,
                    "Candidate floor used when LLM votes were collected (default 5)")
        ->capture_default_str();

    // report
    std::size_t rank_k = 3;
    auto* report = app.add_subcommand(
        "report", "Rankings, score matrix, correlation matrices, alignment report");
    add_common(report, common);
    report->add_option("--top-k", rank_k, "Factors per top/bottom list (default 3)")
        ->capture_default_str();

    CLI11_PARSE(app, argc, argv);

    try {
        if (ingest->parsed()) {
            return cmd_ingest(common, in_prompts, in_responses, in_votes, min_user_votes,
                              min_response_votes);
        }
        if (annotate->parsed()) return cmd_annotate(common, annotate_transport, annotate_trials);
        if (features->parsed()) {
            return cmd_features(common, morph_path, labels_path, exa_path, neg_path);
        }
        if (cluster->parsed()) {
            return cmd_cluster(common, dims, cluster_k, cluster_seed, restarts, k_range);
        }
        if (collect->parsed()) {
            return cmd_collect_llm(common, collect_transport, persona_name, collect_trials,
                                   min_candidates, collect_seed);
        }
        if (btl->parsed()) return cmd_btl(common, alpha, btl_min_candidates);
        if (report->parsed()) return cmd_report(common, rank_k);
    } catch (const CLI::ValidationError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    } catch (const DatasetError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    } catch (const IoError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    }
    return 0;
}

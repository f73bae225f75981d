#include "config.hpp"

#include <kcut/io.hpp>
#include <kcut/pipeline.hpp>

#include <yaml-cpp/yaml.h>

#include <charconv>
#include <set>
#include <sstream>

namespace kcut::app {

namespace {

std::string shortest(double v) {
    char buf[64];
    auto r = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, r.ptr);
}

// Reads a mapping and rejects keys it was not asked about.
class Section {
public:
    Section(const YAML::Node& node, std::string path) : path_(std::move(path)) {
        if (node && !node.IsNull()) node_ = node;
        else node_ = YAML::Node(YAML::NodeType::Undefined);
        if (node_ && !node_.IsMap()) throw UsageError("config: '" + path_ + "' must be a mapping");
    }
    ~Section() noexcept(false) {
        if (!node_ || std::uncaught_exceptions()) return;
        for (const auto& kv : node_) {
            std::string k = kv.first.as<std::string>();
            if (!seen_.count(k)) throw UsageError("config: unknown key '" + qualified(k) + "'");
        }
    }

    template <class T>
    void get(const char* key, T& into) {
        seen_.insert(key);
        if (!node_ || !node_[key]) return;
        try {
            into = node_[key].template as<T>();
        } catch (const YAML::Exception&) {
            throw UsageError("config: bad value for '" + qualified(key) + "'");
        }
    }
    void get(const char* key, std::optional<double>& into) {
        seen_.insert(key);
        if (!node_ || !node_[key] || node_[key].IsNull()) return;
        double v = 0;
        get(key, v);
        into = v;
    }
    void get(const char* key, std::optional<std::array<int, 4>>& into) {
        seen_.insert(key);
        if (!node_ || !node_[key] || node_[key].IsNull()) return;
        const YAML::Node b = node_[key];
        if (!b.IsSequence() || b.size() != 4) throw UsageError("config: '" + qualified(key) + "' needs [x, y, w, h]");
        std::array<int, 4> v{};
        for (int i = 0; i < 4; ++i) v[i] = b[i].as<int>();
        into = v;
    }
    Section sub(const char* key) {
        seen_.insert(key);
        return Section(node_ ? node_[key] : YAML::Node(YAML::NodeType::Undefined), qualified(key));
    }

private:
    std::string qualified(const std::string& k) const { return path_.empty() ? k : path_ + "." + k; }
    YAML::Node node_;
    std::string path_;
    std::set<std::string> seen_;
};

}  // namespace

RunConfig RunConfig::segmentation_defaults() {
    RunConfig c;
    c.objective = "aa";
    c.kernel = "knn:400,50";
    c.gamma = 1.0;
    return c;
}

void RunConfig::validate() const {
    try {
        objective_from_string(objective);
        KernelPolicy::parse(kernel);
        BoundChoice::parse(bound);
        move_kind_from_string(moves);
        bound_policy_from_string(schedule);
    } catch (const kcut::Error& e) {
        throw UsageError(std::string("config: ") + e.what());
    }
    if (K < 1) throw UsageError("config: labels must be >= 1");
    if (gamma < 0) throw UsageError("config: gamma must be >= 0");
    if (max_outer < 1) throw UsageError("config: max_outer must be >= 1");
    if (!(tol >= 0)) throw UsageError("config: tol must be >= 0");
    if (init != "kmeans" && init != "spectral" && init != "random") throw UsageError("config: unknown init '" + init + "'");
    if (potts != "contrast" && potts != "length") throw UsageError("config: unknown potts mode '" + potts + "'");
    if (connectivity != 4 && connectivity != 8) throw UsageError("config: connectivity must be 4 or 8");
    if (color != "lab" && color != "rgb") throw UsageError("config: unknown color space '" + color + "'");
    if (potts_knn < 0 || pn_patch < 0 || rank < 0 || max_pixels < 0) throw UsageError("config: negative size");
    if (label_cost < 0) throw UsageError("config: label_cost must be >= 0");
    if (!(pn_fraction > 0 && pn_fraction <= 1)) throw UsageError("config: robust_pn fraction must be in (0, 1]");
}

RunConfig parse_config(const std::string& text) {
    YAML::Node root;
    try {
        root = YAML::Load(text);
    } catch (const YAML::Exception& e) {
        throw UsageError(std::string("config: ") + e.what());
    }
    if (root.IsNull()) root = YAML::Node(YAML::NodeType::Map);
    RunConfig c;
    {
        Section top(root, "");
        top.get("input", c.input);
        top.get("truth", c.truth);
        top.get("affinity", c.affinity);
        top.get("out", c.out);
        top.get("seed", c.seed);
        {
            Section m = top.sub("model");
            m.get("objective", c.objective);
            m.get("kernel", c.kernel);
            m.get("bound", c.bound);
            m.get("labels", c.K);
            m.get("gamma", c.gamma);
            m.get("delta", c.delta);
        }
        {
            Section o = top.sub("optimizer");
            o.get("moves", c.moves);
            o.get("init", c.init);
            o.get("schedule", c.schedule);
            o.get("max_outer", c.max_outer);
            o.get("tol", c.tol);
        }
        {
            Section m = top.sub("mrf");
            m.get("potts_knn", c.potts_knn);
            m.get("potts", c.potts);
            m.get("connectivity", c.connectivity);
            m.get("label_cost", c.label_cost);
            Section r = m.sub("robust_pn");
            r.get("patch", c.pn_patch);
            r.get("fraction", c.pn_fraction);
        }
        {
            Section s = top.sub("segment");
            s.get("seeds_png", c.seeds_png);
            s.get("box", c.box);
            s.get("color", c.color);
            s.get("beta_xy", c.beta_xy);
            s.get("max_pixels", c.max_pixels);
        }
        {
            Section e = top.sub("embed");
            e.get("rank", c.rank);
        }
    }
    return c;
}

RunConfig load_config(const std::string& path) {
    std::string text;
    try {
        text = read_text(path);
    } catch (const kcut::Error&) {
        throw UsageError("cannot read config file: " + path);
    }
    return parse_config(text);
}

std::string to_yaml(const RunConfig& c) {
    YAML::Emitter out;
    auto num = [&](const char* k, double v) { out << YAML::Key << k << YAML::Value << shortest(v); };
    auto str = [&](const char* k, const std::string& v) {
        out << YAML::Key << k << YAML::Value << YAML::DoubleQuoted << v;
    };
    out << YAML::BeginMap;
    str("input", c.input);
    str("truth", c.truth);
    str("affinity", c.affinity);
    str("out", c.out);
    out << YAML::Key << "seed" << YAML::Value << c.seed;

    out << YAML::Key << "model" << YAML::Value << YAML::BeginMap;
    str("objective", c.objective);
    str("kernel", c.kernel);
    str("bound", c.bound);
    out << YAML::Key << "labels" << YAML::Value << c.K;
    num("gamma", c.gamma);
    out << YAML::Key << "delta" << YAML::Value;
    if (c.delta) out << shortest(*c.delta);
    else out << YAML::Null;
    out << YAML::EndMap;

    out << YAML::Key << "optimizer" << YAML::Value << YAML::BeginMap;
    str("moves", c.moves);
    str("init", c.init);
    str("schedule", c.schedule);
    out << YAML::Key << "max_outer" << YAML::Value << c.max_outer;
    num("tol", c.tol);
    out << YAML::EndMap;

    out << YAML::Key << "mrf" << YAML::Value << YAML::BeginMap;
    out << YAML::Key << "potts_knn" << YAML::Value << c.potts_knn;
    str("potts", c.potts);
    out << YAML::Key << "connectivity" << YAML::Value << c.connectivity;
    num("label_cost", c.label_cost);
    out << YAML::Key << "robust_pn" << YAML::Value << YAML::BeginMap;
    out << YAML::Key << "patch" << YAML::Value << c.pn_patch;
    num("fraction", c.pn_fraction);
    out << YAML::EndMap << YAML::EndMap;

    out << YAML::Key << "segment" << YAML::Value << YAML::BeginMap;
    str("seeds_png", c.seeds_png);
    out << YAML::Key << "box" << YAML::Value;
    if (c.box) out << YAML::Flow << std::vector<int>(c.box->begin(), c.box->end());
    else out << YAML::Null;
    str("color", c.color);
    num("beta_xy", c.beta_xy);
    out << YAML::Key << "max_pixels" << YAML::Value << c.max_pixels;
    out << YAML::EndMap;

    out << YAML::Key << "embed" << YAML::Value << YAML::BeginMap;
    out << YAML::Key << "rank" << YAML::Value << c.rank;
    out << YAML::EndMap;
    out << YAML::EndMap;
    return std::string(out.c_str()) + "\n";
}

void save_config(const std::string& path, const RunConfig& cfg) { write_text(path, to_yaml(cfg)); }

std::array<int, 4> parse_box(const std::string& s) {
    std::array<int, 4> b{};
    std::stringstream ss(s);
    std::string tok;
    int i = 0;
    while (std::getline(ss, tok, ',')) {
        if (i == 4) throw UsageError("--box needs exactly x,y,w,h");
        tok.erase(0, tok.find_first_not_of(" \t"));
        tok.erase(tok.find_last_not_of(" \t") + 1);
        try {
            size_t used = 0;
            b[i] = std::stoi(tok, &used);
            if (used != tok.size()) throw std::invalid_argument(tok);
        } catch (const std::exception&) {
            throw UsageError("--box: bad number '" + tok + "'");
        }
        ++i;
    }
    if (i != 4) throw UsageError("--box needs exactly x,y,w,h");
    if (b[0] < 0 || b[1] < 0 || b[2] <= 0 || b[3] <= 0) throw UsageError("--box: need x,y >= 0 and w,h > 0");
    return b;
}

}  // namespace kcut::app

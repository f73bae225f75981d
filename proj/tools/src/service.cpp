#include "service.hpp"

#include "commands.hpp"

#include <kcut/io.hpp>
#include <kcut/pipeline.hpp>

#include <httplib.h>
#include <json.hpp>

#include <cmath>
#include <random>
#include <sstream>

namespace kcut::app {

using nlohmann::json;

struct Session {
    std::string id;
    std::mutex mu;
    Image image;
    int original_width = 0, original_height = 0;
    double scale = 1.0;  // working pixels per original pixel
    RunConfig params;

    std::string feature_key, affinity_key, potts_key;
    Dataset features;
    Affinity affinity;
    PottsEdges potts;

    std::optional<Labeling> labeling;
    std::vector<json> segments;
    Service::Clock::time_point last_used;
};

namespace {

struct HttpError {
    int status;
    std::string message;
};

void send_json(httplib::Response& res, int status, const json& body) {
    res.status = status;
    res.set_content(body.dump(), "application/json");
}

void send_error(httplib::Response& res, int status, const std::string& message) {
    send_json(res, status, {{"error", message}, {"status", status}});
}

// Overlays request parameters onto the session snapshot.
void apply_params(const json& j, RunConfig& c) {
    if (j.is_null()) return;
    if (!j.is_object()) throw HttpError{422, "params must be an object"};
    for (const auto& [k, v] : j.items()) {
        try {
            if (k == "objective") c.objective = v.get<std::string>();
            else if (k == "kernel") c.kernel = v.get<std::string>();
            else if (k == "gamma") c.gamma = v.get<double>();
            else if (k == "K" || k == "labels") c.K = v.get<int>();
            else if (k == "bound") c.bound = v.get<std::string>();
            else if (k == "moves") c.moves = v.get<std::string>();
            else if (k == "schedule") c.schedule = v.get<std::string>();
            else if (k == "color") c.color = v.get<std::string>();
            else if (k == "beta_xy") c.beta_xy = v.get<double>();
            else if (k == "potts") c.potts = v.get<std::string>();
            else if (k == "connectivity") c.connectivity = v.get<int>();
            else if (k == "label_cost") c.label_cost = v.get<double>();
            else if (k == "seed") c.seed = v.get<std::uint64_t>();
            else throw HttpError{422, "unknown parameter '" + k + "'"};
        } catch (const json::exception&) {
            throw HttpError{422, "bad value for parameter '" + k + "'"};
        }
    }
    try {
        c.validate();
    } catch (const UsageError& e) {
        throw HttpError{422, e.what()};
    }
    if (c.K < 2) throw HttpError{422, "segmentation needs K >= 2"};
}

json params_json(const RunConfig& c) {
    return {{"objective", c.objective}, {"kernel", c.kernel}, {"gamma", c.gamma},   {"K", c.K},
            {"bound", c.bound},         {"moves", c.moves},   {"schedule", c.schedule}, {"color", c.color},
            {"beta_xy", c.beta_xy},     {"potts", c.potts},   {"connectivity", c.connectivity},
            {"label_cost", c.label_cost}, {"seed", c.seed}};
}

std::vector<int> rasterize(const json& strokes, const Session& s, int K) {
    const Grid& g = *s.features.grid;
    std::vector<int> hard(static_cast<size_t>(g.height) * g.width, -1);
    if (strokes.is_null()) return hard;
    if (!strokes.is_array()) throw HttpError{422, "seeds must be an array of strokes"};
    int i = 0;
    for (const auto& st : strokes) {
        const std::string at = "stroke " + std::to_string(i++) + ": ";
        if (!st.is_object() || !st.contains("label") || !st.contains("points"))
            throw HttpError{422, at + "needs label and points"};
        if (!st["label"].is_number_integer()) throw HttpError{422, at + "label must be an integer"};
        int label = st["label"].get<int>();
        if (label < 1 || label > K)
            throw HttpError{422, at + "label " + std::to_string(label) + " outside 1.." + std::to_string(K)};
        double radius = 3.0;
        if (st.contains("radius")) {
            if (!st["radius"].is_number() || !(st["radius"].get<double>() > 0)) throw HttpError{422, at + "radius must be positive"};
            radius = st["radius"].get<double>();
        }
        if (!st["points"].is_array() || st["points"].empty()) throw HttpError{422, at + "points must be a non-empty array"};
        std::vector<std::pair<double, double>> pts;
        for (const auto& p : st["points"]) {
            if (!p.is_array() || p.size() != 2 || !p[0].is_number() || !p[1].is_number())
                throw HttpError{422, at + "points must be [x, y] pairs"};
            double x = p[0].get<double>(), y = p[1].get<double>();
            if (!std::isfinite(x) || !std::isfinite(y)) throw HttpError{422, at + "non-finite coordinate"};
            // pixel centres map between resolutions
            pts.emplace_back((x + 0.5) * s.scale - 0.5, (y + 0.5) * s.scale - 0.5);
        }
        rasterize_stroke(hard, g, pts, radius * s.scale, label - 1);
    }
    return hard;
}

void refresh_caches(Session& s, const RunConfig& p) {
    std::ostringstream fk;
    fk << p.color << '|' << p.beta_xy;
    if (fk.str() != s.feature_key) {
        FeatureOptions fo;
        fo.color = p.color == "rgb" ? ColorSpace::Rgb : ColorSpace::Lab;
        fo.beta_xy = p.beta_xy;
        s.features = image_features(s.image, fo);
        s.feature_key = fk.str();
        s.affinity_key.clear();
        s.potts_key.clear();
    }
    s.features.grid->connectivity = p.connectivity;
    const std::string ak = s.feature_key + '|' + KernelPolicy::parse(p.kernel).to_string() + '|' + std::to_string(p.seed);
    if (ak != s.affinity_key) {
        s.affinity = build_affinity(s.features, KernelPolicy::parse(p.kernel), p.seed);
        s.affinity_key = ak;
    }
    const std::string pk = s.feature_key + '|' + p.potts + '|' + std::to_string(p.connectivity);
    if (pk != s.potts_key) {
        Dataset color;
        color.features = s.features.features.leftCols(std::min<Eigen::Index>(3, s.features.dim()));
        color.grid = s.features.grid;
        s.potts = contrast_weights(color, p.connectivity, p.potts == "length" ? PottsMode::Length : PottsMode::Contrast);
        s.potts_key = pk;
    }
}

json solve_session(Session& s, const json& body, const ServiceOptions& opt) {
    if (!body.is_object()) throw HttpError{400, "body must be a JSON object"};
    RunConfig p = s.params;
    apply_params(body.contains("params") ? body["params"] : json(), p);
    int iterations = opt.iterations_per_solve;
    if (body.contains("iterations")) {
        if (!body["iterations"].is_number_integer()) throw HttpError{422, "iterations must be an integer"};
        iterations = body["iterations"].get<int>();
        if (iterations < 1 || iterations > opt.max_iterations_per_solve)
            throw HttpError{422, "iterations outside 1.." + std::to_string(opt.max_iterations_per_solve)};
    }
    try {
        refresh_caches(s, p);
    } catch (const kcut::ParameterError& e) {
        throw HttpError{422, e.what()};
    }
    std::vector<int> hard = rasterize(body.contains("seeds") ? body["seeds"] : json(), s, p.K);

    JointEnergySpec spec;
    spec.objective = objective_from_string(p.objective);
    spec.K = p.K;
    spec.gamma = p.gamma;
    spec.affinity = s.affinity;
    spec.hard = hard;
    if (p.gamma > 0) {
        spec.mrf.push_back(s.potts);
        if (p.label_cost > 0) spec.mrf.push_back(LabelCost{Vec::Constant(p.K, p.label_cost)});
    }

    const bool warm = s.labeling && s.labeling->K == p.K;
    Labeling init = warm ? apply_hard(*s.labeling, hard) : seeded_init(s.features, hard, p.K, p.seed);
    CutOptions co = cut_options(p);
    co.schedule.max_outer = iterations;
    CutResult r = solve(spec, init, BoundChoice::parse(p.bound), co);

    s.labeling = r.labeling;
    s.params = p;
    const int index = static_cast<int>(s.segments.size()) + 1;
    json records = trace_json(r.trace);
    s.segments.push_back({{"solve", index},
                          {"method", r.trace.method},
                          {"warm_start", warm},
                          {"params", params_json(p)},
                          {"records", records}});

    int seeded = 0;
    for (int v : hard) seeded += v >= 0;
    const int outer = r.trace.records.empty() ? 0 : r.trace.records.back().iteration;
    const Image mask = label_mask(r.labeling.labels, p.K, s.image.height, s.image.width);
    return {{"id", s.id},
            {"solve", index},
            {"width", s.image.width},
            {"height", s.image.height},
            {"scale", s.scale},
            {"K", p.K},
            {"mask_png", httplib::detail::base64_encode(encode_png(mask))},
            {"energy", energy_json(eval_joint(spec, r.labeling))},
            {"initial_energy", eval_joint(spec, init).total},
            {"trace_tail", records},
            {"warm_start", warm},
            {"converged", outer < iterations},
            {"seeded_pixels", seeded},
            {"params", params_json(p)}};
}

}  // namespace

Service::Service(ServiceOptions opt) : opt_(opt), now_([] { return Clock::now(); }) {
    salt_ = std::random_device{}();
    salt_ = (salt_ << 32) ^ std::random_device{}();
}

Service::~Service() = default;

void Service::set_clock(std::function<Clock::time_point()> now) {
    std::lock_guard<std::mutex> g(mu_);
    now_ = std::move(now);
}

std::size_t Service::session_count() {
    sweep();
    std::lock_guard<std::mutex> g(mu_);
    return sessions_.size();
}

void Service::sweep() {
    std::lock_guard<std::mutex> g(mu_);
    const auto now = now_();
    for (auto it = sessions_.begin(); it != sessions_.end();) {
        if (now - it->second->last_used > opt_.ttl) it = sessions_.erase(it);
        else ++it;
    }
}

std::shared_ptr<Session> Service::find(const std::string& id) {
    sweep();
    std::lock_guard<std::mutex> g(mu_);
    auto it = sessions_.find(id);
    if (it == sessions_.end()) return nullptr;
    it->second->last_used = now_();
    return it->second;
}

void Service::mount(httplib::Server& server) {
    server.set_payload_max_length(opt_.max_upload_bytes);
    server.set_default_headers({{"Access-Control-Allow-Origin", "*"},
                                {"Access-Control-Allow-Headers", "Content-Type"},
                                {"Access-Control-Allow-Methods", "GET, POST, DELETE, OPTIONS"}});
    server.Options(R"(/v1/.*)", [](const httplib::Request&, httplib::Response& res) { res.status = 204; });
    server.set_error_handler([](const httplib::Request&, httplib::Response& res) {
        if (res.body.empty()) send_error(res, res.status, httplib::status_message(res.status));
    });

    server.Get("/v1/health", [](const httplib::Request&, httplib::Response& res) {
        send_json(res, 200, {{"status", "ok"}});
    });

    server.Post("/v1/sessions", [this](const httplib::Request& req, httplib::Response& res) {
        std::string bytes = req.body;
        RunConfig params = RunConfig::segmentation_defaults();
        try {
            if (req.is_multipart_form_data()) {
                if (!req.has_file("image")) throw HttpError{422, "multipart upload needs an 'image' part"};
                bytes = req.get_file_value("image").content;
                if (req.has_file("params")) {
                    json pj = json::parse(req.get_file_value("params").content, nullptr, false);
                    if (pj.is_discarded()) throw HttpError{400, "params part is not JSON"};
                    apply_params(pj, params);
                }
            }
            if (bytes.size() > opt_.max_upload_bytes) throw HttpError{413, "image exceeds the upload limit"};
            if (sniff_format(bytes) == ImageFormat::Unknown) throw HttpError{415, "expected a PNG or JPEG image"};
            Image img;
            try {
                img = decode_image(bytes);
            } catch (const kcut::Error& e) {
                throw HttpError{415, std::string("cannot decode image: ") + e.what()};
            }
            auto s = std::make_shared<Session>();
            s->original_width = img.width;
            s->original_height = img.height;
            if (img.size() > opt_.max_pixels) img = downscale_to(img, opt_.max_pixels);
            s->scale = static_cast<double>(img.width) / s->original_width;
            s->image = std::move(img);
            s->params = params;
            {
                std::lock_guard<std::mutex> g(mu_);
                std::ostringstream id;
                id << std::hex << (salt_ ^ (0x9e3779b97f4a7c15ull * ++counter_));
                s->id = id.str();
                s->last_used = now_();
                sessions_[s->id] = s;
            }
            res.set_header("Location", "/v1/sessions/" + s->id);
            send_json(res, 201, {{"id", s->id},
                                 {"width", s->image.width},
                                 {"height", s->image.height},
                                 {"original_width", s->original_width},
                                 {"original_height", s->original_height},
                                 {"scale", s->scale},
                                 {"params", params_json(s->params)}});
        } catch (const HttpError& e) {
            send_error(res, e.status, e.message);
        }
    });

    server.Get("/v1/sessions/:id", [this](const httplib::Request& req, httplib::Response& res) {
        auto s = find(req.path_params.at("id"));
        if (!s) return send_error(res, 404, "unknown session");
        std::lock_guard<std::mutex> g(s->mu);
        send_json(res, 200, {{"id", s->id},
                             {"width", s->image.width},
                             {"height", s->image.height},
                             {"solves", s->segments.size()},
                             {"params", params_json(s->params)}});
    });

    server.Delete("/v1/sessions/:id", [this](const httplib::Request& req, httplib::Response& res) {
        std::lock_guard<std::mutex> g(mu_);
        if (sessions_.erase(req.path_params.at("id")) == 0) return send_error(res, 404, "unknown session");
        res.status = 204;
    });

    server.Post("/v1/sessions/:id/solve", [this](const httplib::Request& req, httplib::Response& res) {
        auto s = find(req.path_params.at("id"));
        if (!s) return send_error(res, 404, "unknown session");
        json body = req.body.empty() ? json::object() : json::parse(req.body, nullptr, false);
        if (body.is_discarded()) return send_error(res, 400, "body is not valid JSON");
        std::lock_guard<std::mutex> g(s->mu);
        try {
            send_json(res, 200, solve_session(*s, body, opt_));
        } catch (const HttpError& e) {
            send_error(res, e.status, e.message);
        } catch (const kcut::ParameterError& e) {
            send_error(res, 422, e.what());
        } catch (const std::exception& e) {
            send_error(res, 500, e.what());
        }
    });

    server.Get("/v1/sessions/:id/trace", [this](const httplib::Request& req, httplib::Response& res) {
        auto s = find(req.path_params.at("id"));
        if (!s) return send_error(res, 404, "unknown session");
        std::lock_guard<std::mutex> g(s->mu);
        send_json(res, 200, {{"id", s->id}, {"segments", s->segments}});
    });
}

}  // namespace kcut::app

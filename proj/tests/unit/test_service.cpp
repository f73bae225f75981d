#include "helpers.hpp"

#include "service.hpp"

#include <kcut/image.hpp>

#include <httplib.h>
#include <nlohmann/json.hpp>

#include <atomic>
#include <thread>

using namespace kcut;
using namespace kcut::app;
using json = nlohmann::json;

namespace {

// Service on an ephemeral port for the lifetime of the fixture.
struct Server {
    Service service;
    httplib::Server http;
    std::thread thread;
    int port = 0;

    explicit Server(ServiceOptions opt = {}) : service(opt) {
        service.mount(http);
        port = http.bind_to_any_port("127.0.0.1");
        thread = std::thread([this] { http.listen_after_bind(); });
        http.wait_until_ready();
    }
    ~Server() {
        http.stop();
        thread.join();
    }
    httplib::Client client() const {
        httplib::Client c("127.0.0.1", port);
        c.set_read_timeout(120, 0);
        return c;
    }
};

// left half blue, right half orange
std::string two_tone_png(int h, int w) {
    Mat rgb(h * w, 3);
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x)
            rgb.row(y * w + x) = x < w / 2 ? Eigen::RowVector3d(0.1, 0.2, 0.8) : Eigen::RowVector3d(0.9, 0.6, 0.1);
    return encode_png(image_from_rgb(rgb, h, w));
}

std::string create(httplib::Client& c, const std::string& png) {
    auto r = c.Post("/v1/sessions", png, "image/png");
    REQUIRE(r);
    REQUIRE(r->status == 201);
    return json::parse(r->body)["id"].get<std::string>();
}

json strokes(int w, int h) {
    return json::array({{{"label", 1}, {"points", {{1, 1}, {1, h - 2}}}, {"radius", 1.0}},
                        {{"label", 2}, {"points", {{w - 2, 1}, {w - 2, h - 2}}}, {"radius", 1.0}}});
}

std::vector<int> mask_labels(const json& resp) {
    std::string b64 = resp["mask_png"].get<std::string>();
    // decode the base64 payload
    static const std::string alphabet = "ABCDEFGHIJKLMNOPQRSTUVWXYZabcdefghijklmnopqrstuvwxyz0123456789+/";
    std::string bytes;
    int val = 0, bits = -8;
    for (char ch : b64) {
        auto pos = alphabet.find(ch);
        if (pos == std::string::npos) break;
        val = (val << 6) + static_cast<int>(pos);
        bits += 6;
        if (bits >= 0) {
            bytes.push_back(static_cast<char>((val >> bits) & 0xff));
            bits -= 8;
        }
    }
    Image m = decode_image(bytes, true);
    const int K = resp["K"].get<int>();
    std::vector<int> labels(m.size());
    for (int p = 0; p < m.size(); ++p) labels[p] = static_cast<int>(std::lround(m.pixels[p] * (K - 1) / 255.0));
    return labels;
}

}  // namespace

TEST_SUITE("service") {

TEST_CASE("session lifecycle and status codes") {
    Server s;
    auto c = s.client();
    auto h = c.Get("/v1/health");
    REQUIRE(h);
    CHECK(h->status == 200);

    auto r = c.Post("/v1/sessions", two_tone_png(20, 30), "image/png");
    REQUIRE(r);
    CHECK(r->status == 201);
    json body = json::parse(r->body);
    const std::string id = body["id"];
    CHECK(body["width"] == 30);
    CHECK(r->get_header_value("Location") == "/v1/sessions/" + id);

    auto g = c.Get("/v1/sessions/" + id);
    REQUIRE(g);
    CHECK(g->status == 200);
    CHECK(c.Get("/v1/sessions/deadbeef")->status == 404);
    CHECK(c.Post("/v1/sessions/deadbeef/solve", "{}", "application/json")->status == 404);
    CHECK(c.Get("/v1/sessions/deadbeef/trace")->status == 404);

    CHECK(c.Post("/v1/sessions", "GIF89a not supported", "image/gif")->status == 415);
    std::string png = two_tone_png(8, 8);
    CHECK(c.Post("/v1/sessions", png.substr(0, png.size() / 2), "image/png")->status == 415);

    CHECK(c.Delete("/v1/sessions/" + id)->status == 204);
    CHECK(c.Get("/v1/sessions/" + id)->status == 404);
    CHECK(c.Delete("/v1/sessions/" + id)->status == 404);
}

TEST_CASE("uploads over the limit are rejected with 413") {
    ServiceOptions o;
    o.max_upload_bytes = 1000;
    Server s(o);
    auto c = s.client();
    auto r = c.Post("/v1/sessions", two_tone_png(100, 100) + std::string(2000, '\0'), "image/png");
    REQUIRE(r);
    CHECK(r->status == 413);
}

TEST_CASE("multipart upload with parameters") {
    Server s;
    auto c = s.client();
    httplib::MultipartFormDataItems items = {{"image", two_tone_png(10, 10), "a.png", "image/png"},
                                             {"params", R"({"kernel":"knn:12","gamma":2})", "", "application/json"}};
    auto r = c.Post("/v1/sessions", items);
    REQUIRE(r);
    REQUIRE(r->status == 201);
    json b = json::parse(r->body);
    CHECK(b["params"]["kernel"] == "knn:12");
    CHECK(b["params"]["gamma"] == 2.0);
    httplib::MultipartFormDataItems bad = {{"image", two_tone_png(10, 10), "a.png", "image/png"},
                                           {"params", R"({"kernel":"knn:0"})", "", "application/json"}};
    CHECK(c.Post("/v1/sessions", bad)->status == 422);
}

TEST_CASE("invalid solve requests") {
    Server s;
    auto c = s.client();
    const std::string id = create(c, two_tone_png(12, 12));
    const std::string url = "/v1/sessions/" + id + "/solve";
    auto post = [&](const std::string& b) { return c.Post(url, b, "application/json")->status; };
    CHECK(post("{not json") == 400);
    CHECK(post(R"({"seeds":[{"label":3,"points":[[1,1]]}]})") == 422);
    CHECK(post(R"({"seeds":[{"label":0,"points":[[1,1]]}]})") == 422);
    CHECK(post(R"({"seeds":[{"label":1,"points":[]}]})") == 422);
    CHECK(post(R"({"seeds":[{"label":1,"points":[[1]]}]})") == 422);
    CHECK(post(R"({"seeds":[{"label":1,"points":[[1,1]],"radius":-2}]})") == 422);
    CHECK(post(R"({"seeds":"everywhere"})") == 422);
    CHECK(post(R"({"params":{"objective":"ratio"}})") == 422);
    CHECK(post(R"({"params":{"colour":"red"}})") == 422);
    CHECK(post(R"({"params":{"K":1}})") == 422);
    CHECK(post(R"({"iterations":0})") == 422);
    CHECK(post(R"({"iterations":1000})") == 422);
    // failed requests leave no trace segments
    json t = json::parse(c.Get("/v1/sessions/" + id + "/trace")->body);
    CHECK(t["segments"].empty());
}

TEST_CASE("solves honor seeds, descend, and log one segment each") {
    Server s;
    auto c = s.client();
    const int w = 16, h = 12;
    const std::string id = create(c, two_tone_png(h, w));
    json req = {{"seeds", strokes(w, h)}, {"params", {{"kernel", "knn:10"}}}};

    std::vector<double> energies;
    const int k = 4;
    for (int i = 0; i < k; ++i) {
        auto r = c.Post("/v1/sessions/" + id + "/solve", req.dump(), "application/json");
        REQUIRE(r);
        INFO(r->body);
        REQUIRE(r->status == 200);
        json b = json::parse(r->body);
        CHECK(b["solve"] == i + 1);
        CHECK(b["warm_start"] == (i > 0));
        CHECK(b["trace_tail"].size() <= 3 + 1);
        CHECK(b["seeded_pixels"].get<int>() > 0);
        energies.push_back(b["energy"]["total"].get<double>());
        CHECK(energies.back() <= b["initial_energy"].get<double>() + 1e-9);
        auto labels = mask_labels(b);
        REQUIRE(labels.size() == static_cast<size_t>(w * h));
        for (int y = 0; y < h; ++y) {
            CHECK(labels[y * w + 1] == 0);
            CHECK(labels[y * w + w - 2] == 1);
        }
        if (i == k - 1)
            for (int p = 0; p < w * h; ++p) CHECK(labels[p] == (p % w < w / 2 ? 0 : 1));
    }
    for (int i = 1; i < k; ++i) CHECK(energies[i] <= energies[i - 1] + 1e-9 * std::abs(energies[i - 1]));

    json t = json::parse(c.Get("/v1/sessions/" + id + "/trace")->body);
    REQUIRE(t["segments"].size() == k);
    for (const auto& seg : t["segments"]) {
        const auto& rec = seg["records"];
        for (size_t j = 1; j < rec.size(); ++j)
            CHECK(rec[j]["energy"].get<double>() <= rec[j - 1]["energy"].get<double>() + 1e-9);
    }

    // changing K starts cold
    json k3 = {{"params", {{"K", 3}}}};
    auto r3 = c.Post("/v1/sessions/" + id + "/solve", k3.dump(), "application/json");
    REQUIRE(r3->status == 200);
    CHECK(json::parse(r3->body)["warm_start"] == false);
}

TEST_CASE("large uploads are downscaled and strokes map to the stored grid") {
    ServiceOptions o;
    o.max_pixels = 2000;
    Server s(o);
    auto c = s.client();
    auto r = c.Post("/v1/sessions", two_tone_png(80, 100), "image/png");
    REQUIRE(r->status == 201);
    json b = json::parse(r->body);
    const int w = b["width"], h = b["height"];
    CHECK(w * h <= 2000);
    CHECK(b["original_width"] == 100);
    CHECK(b["scale"].get<double>() < 1.0);
    // strokes given in original coordinates
    json req = {{"seeds", strokes(100, 80)}, {"params", {{"kernel", "knn:10"}}}};
    auto sr = c.Post("/v1/sessions/" + b["id"].get<std::string>() + "/solve", req.dump(), "application/json");
    REQUIRE(sr->status == 200);
    json sb = json::parse(sr->body);
    auto labels = mask_labels(sb);
    CHECK(labels.size() == static_cast<size_t>(w * h));
    int wrong = 0;
    for (int p = 0; p < w * h; ++p) wrong += labels[p] != (p % w < w / 2 ? 0 : 1);
    CHECK(wrong <= h);
}

TEST_CASE("sessions expire after the TTL") {
    ServiceOptions o;
    o.ttl = std::chrono::seconds(60);
    Server s(o);
    std::atomic<long> offset{0};
    const auto t0 = Service::Clock::now();
    s.service.set_clock([&] { return t0 + std::chrono::seconds(offset.load()); });
    auto c = s.client();
    const std::string id = create(c, two_tone_png(8, 8));
    offset = 50;
    CHECK(c.Get("/v1/sessions/" + id)->status == 200);  // touching refreshes
    offset = 100;
    CHECK(c.Get("/v1/sessions/" + id)->status == 200);
    offset = 200;
    CHECK(c.Get("/v1/sessions/" + id)->status == 404);
    CHECK(s.service.session_count() == 0);
}

TEST_CASE("concurrent sessions stay isolated") {
    Server s;
    const int w = 14, h = 10;
    std::vector<std::string> ids;
    {
        auto c = s.client();
        for (int i = 0; i < 4; ++i) ids.push_back(create(c, two_tone_png(h, w)));
    }
    std::vector<std::vector<int>> masks(4);
    std::vector<int> status(4, 0);
    std::vector<std::thread> th;
    for (int i = 0; i < 4; ++i)
        th.emplace_back([&, i] {
            auto c = s.client();
            // even sessions put label 1 on the left, odd ones on the right
            json st = strokes(w, h);
            if (i % 2) std::swap(st[0]["label"], st[1]["label"]);
            json req = {{"seeds", st}, {"params", {{"kernel", "knn:10"}}}};
            for (int rep = 0; rep < 2; ++rep) {
                auto r = c.Post("/v1/sessions/" + ids[i] + "/solve", req.dump(), "application/json");
                status[i] = r ? r->status : -1;
                if (r && r->status == 200) masks[i] = mask_labels(json::parse(r->body));
            }
        });
    for (auto& t : th) t.join();
    for (int i = 0; i < 4; ++i) {
        CHECK(status[i] == 200);
        REQUIRE(masks[i].size() == static_cast<size_t>(w * h));
        const int left = i % 2 ? 1 : 0;
        CHECK(masks[i][0] == left);
        CHECK(masks[i][w - 1] == 1 - left);
    }
    auto c = s.client();
    for (const auto& id : ids) CHECK(json::parse(c.Get("/v1/sessions/" + id + "/trace")->body)["segments"].size() == 2);
    CHECK(s.service.session_count() == 4);
}

}

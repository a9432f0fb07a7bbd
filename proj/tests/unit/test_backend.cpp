#include <doctest.h>

#include <atomic>
#include <fstream>
#include <thread>

#include <httplib.h>

#include "pgds/backend.hpp"
#include "support.hpp"

using namespace pgds;

namespace {

// Local chat-completion stub on an ephemeral port.
class StubServer {
  public:
    StubServer() {
        const auto reply = [](httplib::Response& res, const std::string& text) {
            res.set_content(Json{{"choices", {{{"message", {{"content", text}}}}}}}.dump(), "application/json");
        };
        server_.Post("/echo", [this, reply](const httplib::Request& req, httplib::Response& res) {
            ++hits;
            last_body = req.body;
            last_auth = req.get_header_value("Authorization");
            reply(res, "Sarcastic: no");
        });
        server_.Post("/slow", [this, reply](const httplib::Request&, httplib::Response& res) {
            ++hits;
            std::this_thread::sleep_for(std::chrono::milliseconds(800));
            reply(res, "late");
        });
        server_.Post("/fail", [this](const httplib::Request&, httplib::Response& res) {
            ++hits;
            res.status = 500;
            res.set_content("boom", "text/plain");
        });
        server_.Post("/html", [this](const httplib::Request&, httplib::Response& res) {
            ++hits;
            res.set_content("<html>", "text/html");
        });
        port_ = server_.bind_to_any_port("127.0.0.1");
        thread_ = std::thread([this] { server_.listen_after_bind(); });
        server_.wait_until_ready();
    }
    ~StubServer() {
        server_.stop();
        thread_.join();
    }
    std::string url(const std::string& path) const { return "http://127.0.0.1:" + std::to_string(port_) + path; }

    std::atomic<int> hits{0};
    std::string last_body;
    std::string last_auth;

  private:
    httplib::Server server_;
    int port_ = 0;
    std::thread thread_;
};

PromptBundle bundle_with_images(std::size_t n) {
    PromptBundle b;
    b.instruction = "format";
    b.parts.push_back({PromptPart::Kind::Text, "caption"});
    for (std::size_t i = 0; i < n; ++i) b.parts.push_back({PromptPart::Kind::Image, "img.png"});
    return b;
}

RemoteConfig config_for(const std::string& url, const std::filesystem::path& root) {
    RemoteConfig c;
    c.url = url;
    c.model = "stub-model";
    c.api_key = "sk-secret-123";
    c.image_root = root;
    c.timeout = std::chrono::milliseconds(300);
    return c;
}

}  // namespace

TEST_SUITE("backend") {

TEST_CASE("remote backend round trip") {
    testing::TempDir dir("be");
    std::ofstream(dir / "img.png", std::ios::binary) << "\x89PNG fake bytes";
    StubServer srv;
    std::vector<std::string> log;
    RemoteBackend be(config_for(srv.url("/echo"), dir.path()), [&](const std::string& s) { log.push_back(s); });
    CHECK(be.respond(bundle_with_images(1)) == "Sarcastic: no");
    CHECK(srv.hits == 1);
    CHECK(srv.last_auth == "Bearer sk-secret-123");
    const Json body = Json::parse(srv.last_body);
    CHECK(body["model"] == "stub-model");
    CHECK(body["messages"][0]["role"] == "system");
    const auto& content = body["messages"][1]["content"];
    CHECK(content[0]["text"] == "caption");
    CHECK(content[1]["image_url"]["url"].get<std::string>().rfind("data:image/png;base64,", 0) == 0);
    for (const auto& line : log) {
        CHECK(line.find("sk-secret-123") == std::string::npos);
        CHECK(line.find("base64,iVBO") == std::string::npos);
    }
}

TEST_CASE("error classes") {
    testing::TempDir dir("be");
    StubServer srv;
    RemoteBackend slow(config_for(srv.url("/slow"), dir.path()));
    CHECK_THROWS_AS(slow.respond(bundle_with_images(0)), TimeoutError);

    RemoteBackend fail(config_for(srv.url("/fail"), dir.path()));
    try {
        fail.respond(bundle_with_images(0));
        FAIL("expected HttpStatusError");
    } catch (const HttpStatusError& e) {
        CHECK(e.status() == 500);
    }
    RemoteBackend html(config_for(srv.url("/html"), dir.path()));
    CHECK_THROWS_AS(html.respond(bundle_with_images(0)), TransportError);

    // Nothing listens on a freshly released port.
    int closed = 0;
    {
        httplib::Server tmp;
        closed = tmp.bind_to_any_port("127.0.0.1");
    }
    RemoteBackend refused(config_for("http://127.0.0.1:" + std::to_string(closed) + "/x", dir.path()));
    CHECK_THROWS_AS(refused.respond(bundle_with_images(0)), BackendError);
}

TEST_CASE("capability errors are raised before any request") {
    testing::TempDir dir("be");
    std::ofstream(dir / "img.png") << "x";
    StubServer srv;
    auto cfg = config_for(srv.url("/echo"), dir.path());
    cfg.capabilities.supports_multi_image = false;
    RemoteBackend be(cfg);
    CHECK_THROWS_AS(be.respond(bundle_with_images(2)), CapabilityError);
    CHECK(srv.hits == 0);
    CHECK_NOTHROW(be.respond(bundle_with_images(1)));
    CHECK(srv.hits == 1);

    BackendCapabilities text_only{false, false};
    CHECK_THROWS_AS(check_capabilities(text_only, bundle_with_images(1)), CapabilityError);
    CHECK_NOTHROW(check_capabilities(text_only, bundle_with_images(0)));
}

TEST_CASE("redaction") {
    const std::string s = redact("key sk-1 and data:image/png;base64,AAAABBBB\" end", "sk-1");
    CHECK(s.find("sk-1") == std::string::npos);
    CHECK(s.find("AAAABBBB") == std::string::npos);
    CHECK(s.find("***") != std::string::npos);
    CHECK(s.find("8 base64 chars") != std::string::npos);
}

TEST_CASE("environment configuration") {
    ::unsetenv("PGDS_API_URL");
    ::setenv("PGDS_MODEL", "m", 1);
    CHECK_THROWS_AS(RemoteConfig::from_env(), ValidationError);
    ::setenv("PGDS_API_URL", "http://h/v1", 1);
    ::setenv("PGDS_API_KEY", "k", 1);
    const auto c = RemoteConfig::from_env();
    CHECK(c.url == "http://h/v1");
    CHECK(c.api_key == "k");
    ::unsetenv("PGDS_API_URL");
    ::unsetenv("PGDS_API_KEY");
    ::unsetenv("PGDS_MODEL");
}

TEST_CASE("judge scorer parses a number") {
    class Fixed final : public ModelBackend {
      public:
        std::string reply;
        int calls = 0;
        std::string respond(const PromptBundle&) override {
            ++calls;
            return reply;
        }
        BackendCapabilities capabilities() const override { return {}; }
    } be;
    RemoteJudgeScorer judge(be);
    be.reply = "Score: 0.75";
    CHECK(judge.score("a", "b") == doctest::Approx(0.75));
    be.reply = "2.5";
    CHECK(judge.score("a", "b") == 1.0);
    be.reply = "no idea";
    CHECK(judge.score("a", "b") == 0.0);
    const int before = be.calls;
    CHECK(judge.score("same", "same") == 1.0);
    CHECK(be.calls == before);
}

}

#include "pgds/backend.hpp"

#include <httplib.h>

#include <algorithm>
#include <cctype>
#include <cstdlib>
#include <fstream>
#include <iterator>
#include <sstream>

namespace pgds {

namespace {

struct ParsedUrl {
    std::string origin;  // scheme://host[:port]
    std::string path;
};

ParsedUrl split_url(const std::string& url) {
    const auto scheme_end = url.find("://");
    if (scheme_end == std::string::npos) throw ValidationError("backend URL needs a scheme: '" + url + "'");
    const auto path_start = url.find('/', scheme_end + 3);
    if (path_start == std::string::npos) return {url, "/"};
    return {url.substr(0, path_start), url.substr(path_start)};
}

std::string mime_for(const std::filesystem::path& path) {
    std::string ext = path.extension().string();
    std::transform(ext.begin(), ext.end(), ext.begin(), [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    if (ext == ".png") return "image/png";
    if (ext == ".jpg" || ext == ".jpeg") return "image/jpeg";
    if (ext == ".webp") return "image/webp";
    if (ext == ".gif") return "image/gif";
    return "application/octet-stream";
}

std::string read_bytes(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ValidationError("cannot read image '" + path.string() + "'");
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

std::string env_or_empty(const char* name) {
    const char* v = std::getenv(name);
    return v ? std::string(v) : std::string();
}

std::string completion_text(const Json& body) {
    if (!body.contains("choices") || !body["choices"].is_array() || body["choices"].empty()) {
        throw TransportError("backend response has no choices");
    }
    const Json& message = body["choices"][0].value("message", Json::object());
    if (!message.contains("content")) throw TransportError("backend response has no message content");
    const Json& content = message["content"];
    if (content.is_string()) return content.get<std::string>();
    if (content.is_array()) {
        std::string out;
        for (const Json& part : content) {
            if (part.is_object() && part.value("type", "") == "text") out += part.value("text", "");
        }
        return out;
    }
    throw TransportError("backend message content has an unexpected type");
}

}  // namespace

void check_capabilities(const BackendCapabilities& caps, const PromptBundle& bundle) {
    const std::size_t images = bundle.image_count();
    if (images > 0 && !caps.supports_images) throw CapabilityError("backend does not accept images");
    if (images > 1 && !caps.supports_multi_image) {
        throw CapabilityError("prompt carries " + std::to_string(images) + " images but the backend accepts one");
    }
}

RemoteConfig RemoteConfig::from_env() {
    RemoteConfig c;
    c.url = env_or_empty("PGDS_API_URL");
    c.api_key = env_or_empty("PGDS_API_KEY");
    c.model = env_or_empty("PGDS_MODEL");
    if (c.url.empty()) throw ValidationError("PGDS_API_URL is not set");
    if (c.model.empty()) throw ValidationError("PGDS_MODEL is not set");
    return c;
}

std::string redact(std::string text, const std::string& secret) {
    if (!secret.empty()) {
        for (auto pos = text.find(secret); pos != std::string::npos; pos = text.find(secret, pos)) {
            text.replace(pos, secret.size(), "***");
        }
    }
    constexpr std::string_view kMarker = ";base64,";
    for (auto pos = text.find(kMarker); pos != std::string::npos; pos = text.find(kMarker, pos + 1)) {
        const std::size_t start = pos + kMarker.size();
        std::size_t end = start;
        while (end < text.size() && (std::isalnum(static_cast<unsigned char>(text[end])) || text[end] == '+' ||
                                     text[end] == '/' || text[end] == '=')) {
            ++end;
        }
        text.replace(start, end - start, "<" + std::to_string(end - start) + " base64 chars>");
    }
    return text;
}

RemoteBackend::RemoteBackend(RemoteConfig config, LogSink log) : config_(std::move(config)), log_(std::move(log)) {
    if (config_.url.empty()) throw ValidationError("remote backend needs an endpoint URL");
    split_url(config_.url);
}

Json RemoteBackend::request_body(const PromptBundle& bundle) const {
    Json content = Json::array();
    for (const PromptPart& part : bundle.parts) {
        if (part.kind == PromptPart::Kind::Text) {
            content.push_back({{"type", "text"}, {"text", part.value}});
        } else {
            const std::filesystem::path path = config_.image_root / part.value;
            const std::string url = "data:" + mime_for(path) + ";base64," + httplib::detail::base64_encode(read_bytes(path));
            content.push_back({{"type", "image_url"}, {"image_url", {{"url", url}}}});
        }
    }
    Json messages = Json::array();
    if (!bundle.instruction.empty()) messages.push_back({{"role", "system"}, {"content", bundle.instruction}});
    messages.push_back({{"role", "user"}, {"content", content}});
    return {{"model", config_.model},
            {"messages", messages},
            {"max_tokens", config_.max_tokens},
            {"temperature", config_.temperature}};
}

std::string RemoteBackend::respond(const PromptBundle& bundle) {
    check_capabilities(config_.capabilities, bundle);
    const ParsedUrl url = split_url(config_.url);
    const std::string body = dump_record(request_body(bundle));

    httplib::Client client(url.origin);
    client.set_connection_timeout(config_.timeout);
    client.set_read_timeout(config_.timeout);
    client.set_write_timeout(config_.timeout);
    httplib::Headers headers;
    if (!config_.api_key.empty()) headers.emplace("Authorization", "Bearer " + config_.api_key);

    if (log_) log_("request " + url.path + " " + redact(body, config_.api_key));
    const auto started = std::chrono::steady_clock::now();
    auto res = client.Post(url.path, headers, body, "application/json");
    const auto elapsed = std::chrono::steady_clock::now() - started;

    if (!res) {
        const httplib::Error err = res.error();
        const bool timed_out = err == httplib::Error::ConnectionTimeout ||
                               ((err == httplib::Error::Read || err == httplib::Error::Write) &&
                                elapsed >= config_.timeout * 9 / 10);
        const std::string what = "request to " + url.origin + url.path + " failed: " + httplib::to_string(err);
        if (log_) log_(what);
        if (timed_out) throw TimeoutError(what + " (timeout " + std::to_string(config_.timeout.count()) + " ms)");
        throw TransportError(what);
    }
    if (log_) log_("response " + std::to_string(res->status) + " " + redact(res->body, config_.api_key));
    if (res->status < 200 || res->status >= 300) {
        throw HttpStatusError(res->status, "backend returned HTTP " + std::to_string(res->status));
    }
    Json parsed = Json::parse(res->body, nullptr, false);
    if (parsed.is_discarded()) throw TransportError("backend returned a non-JSON body");
    return completion_text(parsed);
}

double RemoteJudgeScorer::score(std::string_view predicted, std::string_view gold) const {
    if (predicted == gold) return 1.0;
    PromptBundle b;
    b.language = Language::En;
    b.instruction = "You judge semantic consistency. Reply with a single number between 0 and 1.";
    std::ostringstream text;
    text << "How well does the predicted text match the reference in meaning?\nPredicted: " << predicted
         << "\nReference: " << gold << "\nScore:";
    b.parts.push_back({PromptPart::Kind::Text, text.str()});
    const std::string reply = backend_.respond(b);
    for (std::size_t i = 0; i < reply.size(); ++i) {
        if (!std::isdigit(static_cast<unsigned char>(reply[i])) && reply[i] != '.') continue;
        char* end = nullptr;
        const double v = std::strtod(reply.c_str() + i, &end);
        if (end != reply.c_str() + i) return std::clamp(v, 0.0, 1.0);
    }
    return 0.0;
}

}  // namespace pgds

#include "pgds/prompt.hpp"

#include <algorithm>
#include <array>
#include <cstdint>
#include <cstdio>

#include "pgds/common.hpp"

namespace pgds {

namespace {

constexpr std::string_view kWs = " \t\n\r\f\v";

bool is_ws(char c) { return kWs.find(c) != std::string_view::npos; }

std::string_view trim(std::string_view s) {
    const auto b = s.find_first_not_of(kWs);
    if (b == std::string_view::npos) return {};
    const auto e = s.find_last_not_of(kWs);
    return s.substr(b, e - b + 1);
}

char ascii_lower(char c) { return (c >= 'A' && c <= 'Z') ? static_cast<char>(c - 'A' + 'a') : c; }

// Case-insensitive (ASCII only) search; other bytes compare exactly.
std::size_t ifind(std::string_view hay, std::string_view needle, std::size_t from = 0) {
    if (needle.size() > hay.size()) return std::string_view::npos;
    for (std::size_t i = from; i + needle.size() <= hay.size(); ++i) {
        bool ok = true;
        for (std::size_t j = 0; j < needle.size() && ok; ++j) ok = ascii_lower(hay[i + j]) == ascii_lower(needle[j]);
        if (ok) return i;
    }
    return std::string_view::npos;
}

// Skips spaces, then a ':' or fullwidth '：'. Returns the position after the
// colon, or npos.
std::size_t after_colon(std::string_view s, std::size_t pos) {
    while (pos < s.size() && (s[pos] == ' ' || s[pos] == '\t')) ++pos;
    if (pos < s.size() && s[pos] == ':') return pos + 1;
    constexpr std::string_view kFullColon = "\xEF\xBC\x9A";
    if (s.substr(pos, kFullColon.size()) == kFullColon) return pos + kFullColon.size();
    return std::string_view::npos;
}

std::optional<bool> read_verdict_token(std::string_view s, std::size_t pos) {
    while (pos < s.size() && (s[pos] == ' ' || s[pos] == '\t')) ++pos;
    const std::string_view rest = s.substr(pos);
    if (rest.starts_with("不是") || rest.starts_with("否")) return false;
    if (rest.starts_with("是")) return true;
    std::string word;
    for (char c : rest) {
        const char l = ascii_lower(c);
        if ((l >= 'a' && l <= 'z') || (l >= '0' && l <= '9')) word.push_back(l);
        else break;
    }
    if (word == "yes" || word == "y" || word == "true" || word == "1") return true;
    if (word == "no" || word == "n" || word == "false" || word == "0") return false;
    return std::nullopt;
}

std::optional<bool> find_verdict(std::string_view text) {
    for (std::string_view label : {std::string_view("是否讽刺"), std::string_view("sarcastic")}) {
        for (std::size_t at = ifind(text, label); at != std::string_view::npos; at = ifind(text, label, at + 1)) {
            const std::size_t colon = after_colon(text, at + label.size());
            if (colon == std::string_view::npos) continue;
            if (auto v = read_verdict_token(text, colon)) return v;
        }
    }
    for (std::string_view phrase : {"no sarcasm", "not sarcastic", "无讽刺", "不含讽刺", "没有讽刺"}) {
        if (ifind(text, phrase) != std::string_view::npos) return false;
    }
    return std::nullopt;
}

void append_utf8(std::string& out, std::uint32_t cp) {
    if (cp < 0x80) {
        out.push_back(static_cast<char>(cp));
    } else if (cp < 0x800) {
        out.push_back(static_cast<char>(0xC0 | (cp >> 6)));
        out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
    } else if (cp < 0x10000) {
        out.push_back(static_cast<char>(0xE0 | (cp >> 12)));
        out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3F)));
        out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
    } else {
        out.push_back(static_cast<char>(0xF0 | (cp >> 18)));
        out.push_back(static_cast<char>(0x80 | ((cp >> 12) & 0x3F)));
        out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3F)));
        out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
    }
}

std::string unescape(std::string_view s) {
    std::string out;
    out.reserve(s.size());
    std::size_t i = 0;
    while (i < s.size()) {
        if (s[i] != '&') {
            out.push_back(s[i++]);
            continue;
        }
        const std::size_t semi = s.find(';', i);
        if (semi == std::string_view::npos || semi - i > 10) {
            out.push_back(s[i++]);
            continue;
        }
        const std::string_view name = s.substr(i + 1, semi - i - 1);
        std::optional<std::uint32_t> cp;
        if (name == "amp") cp = '&';
        else if (name == "lt") cp = '<';
        else if (name == "gt") cp = '>';
        else if (name == "quot") cp = '"';
        else if (name == "apos") cp = '\'';
        else if (name.size() > 1 && name[0] == '#') {
            const bool hex = name[1] == 'x' || name[1] == 'X';
            const std::string digits(name.substr(hex ? 2 : 1));
            if (!digits.empty() && digits.find_first_not_of(hex ? "0123456789abcdefABCDEF" : "0123456789") ==
                                       std::string::npos) {
                const unsigned long v = std::stoul(digits, nullptr, hex ? 16 : 10);
                if (v <= 0x10FFFF) cp = static_cast<std::uint32_t>(v);
            }
        }
        if (!cp) {
            out.push_back(s[i++]);
            continue;
        }
        append_utf8(out, *cp);
        i = semi + 1;
    }
    return out;
}

std::string escape(std::string_view s) {
    // Leading and trailing whitespace become numeric references so that the
    // reader's trimming cannot eat them.
    std::size_t b = 0, e = s.size();
    while (b < e && is_ws(s[b])) ++b;
    while (e > b && is_ws(s[e - 1])) --e;
    std::string out;
    auto numeric = [&out](char c) {
        char buf[8];
        std::snprintf(buf, sizeof buf, "&#x%X;", static_cast<unsigned>(static_cast<unsigned char>(c)));
        out += buf;
    };
    for (std::size_t i = 0; i < b; ++i) numeric(s[i]);
    for (std::size_t i = b; i < e; ++i) {
        switch (s[i]) {
            case '&': out += "&amp;"; break;
            case '<': out += "&lt;"; break;
            case '>': out += "&gt;"; break;
            default: out.push_back(s[i]);
        }
    }
    for (std::size_t i = e; i < s.size(); ++i) numeric(s[i]);
    return out;
}

std::optional<std::string> tag_content(std::string_view block, std::initializer_list<std::string_view> names) {
    for (std::string_view name : names) {
        const std::string open = "<" + std::string(name) + ">";
        const std::string close = "</" + std::string(name) + ">";
        const auto b = block.find(open);
        if (b == std::string_view::npos) continue;
        const auto e = block.find(close, b + open.size());
        if (e == std::string_view::npos) continue;
        return unescape(trim(block.substr(b + open.size(), e - b - open.size())));
    }
    return std::nullopt;
}

struct FieldLabel {
    std::string_view text;
    int field;  // 0 target, 1 explanation
};
constexpr std::array<FieldLabel, 4> kFieldLabels{{
    {"讽刺对象", 0}, {"target", 0}, {"讽刺解释", 1}, {"explanation", 1}}};

// "Target: ...; Explanation: ..." style fields. A value runs to the next
// field label or the end of its line.
std::array<std::optional<std::string>, 2> labeled_fields(std::string_view text) {
    struct Hit {
        std::size_t label_at, value_at;
        int field;
    };
    std::vector<Hit> hits;
    for (const auto& fl : kFieldLabels) {
        for (auto at = ifind(text, fl.text); at != std::string_view::npos; at = ifind(text, fl.text, at + 1)) {
            const auto colon = after_colon(text, at + fl.text.size());
            if (colon != std::string_view::npos) hits.push_back({at, colon, fl.field});
        }
    }
    std::sort(hits.begin(), hits.end(), [](const Hit& a, const Hit& b) { return a.label_at < b.label_at; });
    std::array<std::optional<std::string>, 2> out;
    for (std::size_t i = 0; i < hits.size(); ++i) {
        if (out[static_cast<std::size_t>(hits[i].field)]) continue;
        std::size_t end = text.find('\n', hits[i].value_at);
        if (i + 1 < hits.size()) end = std::min(end, hits[i + 1].label_at);
        std::string_view value = trim(text.substr(hits[i].value_at, end == std::string_view::npos
                                                                         ? std::string_view::npos
                                                                         : end - hits[i].value_at));
        for (;;) {
            if (value.ends_with(";")) value.remove_suffix(1);
            else if (value.ends_with("；")) value.remove_suffix(std::string_view("；").size());
            else break;
            value = trim(value);
        }
        out[static_cast<std::size_t>(hits[i].field)] = std::string(value);
    }
    return out;
}

std::string caption(const Sample& s) { return s.text; }

void add_text(PromptBundle& b, std::string text) {
    if (!b.parts.empty() && b.parts.back().kind == PromptPart::Kind::Text) {
        b.parts.back().value += text;
    } else {
        b.parts.push_back({PromptPart::Kind::Text, std::move(text)});
    }
}

void add_image_slot(PromptBundle& b, const Sample& s, Language lang) {
    if (s.image_path) {
        b.parts.push_back({PromptPart::Kind::Image, *s.image_path});
    } else {
        add_text(b, lang == Language::Zh ? "无" : "none");
    }
}

void check_demo(const Sample& d) {
    if (!d.label) throw ValidationError("demonstration '" + d.id + "' has no label");
    if (*d.label == 1 && (!d.target || !d.explanation)) {
        throw ValidationError("sarcastic demonstration '" + d.id + "' lacks a target or explanation");
    }
}

std::string format_instruction(Language lang) {
    if (lang == Language::Zh) {
        return "请按以下格式输出：\n"
               "是否讽刺: 是/否\n"
               "<result><讽刺对象>...</讽刺对象><讽刺解释>...</讽刺解释></result>\n"
               "若无讽刺，输出“是否讽刺: 否”，讽刺对象和讽刺解释留空。";
    }
    return "Answer in this format:\n"
           "Sarcastic: yes/no\n"
           "<result><target>...</target><explanation>...</explanation></result>\n"
           "If there is no sarcasm, answer \"Sarcastic: no\" and leave the target and explanation empty.";
}

}  // namespace

std::string_view to_string(Language lang) { return lang == Language::Zh ? "zh" : "en"; }

Language parse_language(std::string_view name) {
    if (name == "zh") return Language::Zh;
    if (name == "en") return Language::En;
    throw ValidationError("unknown language '" + std::string(name) + "' (expected zh or en)");
}

std::size_t PromptBundle::image_count() const {
    return static_cast<std::size_t>(
        std::count_if(parts.begin(), parts.end(), [](const PromptPart& p) { return p.kind == PromptPart::Kind::Image; }));
}

std::string PromptBundle::text() const {
    std::string out;
    for (const auto& p : parts) out += p.kind == PromptPart::Kind::Text ? p.value : std::string("[image]");
    return out;
}

PromptBundle build_prompt(const std::vector<Sample>& demos, const Sample& query, Language language) {
    for (const Sample& d : demos) check_demo(d);
    const bool zh = language == Language::Zh;
    PromptBundle b;
    b.language = language;
    b.instruction = format_instruction(language);
    b.query_id = query.id;

    if (demos.empty()) {
        if (query.image_path) b.parts.push_back({PromptPart::Kind::Image, *query.image_path});
        add_text(b, zh ? "给你一张图片，图片配文为:" + caption(query) + "。分析该图文对是否含有讽刺，并给出讽刺对象和解释。"
                       : "Given an image with caption: " + caption(query) +
                             ". Analyze whether this pair contains sarcasm, and provide the target and explanation.");
        return b;
    }

    for (const Sample& d : demos) {
        b.demo_ids.push_back(d.id);
        add_text(b, zh ? "Example: 输入：配文:" + caption(d) + "; 图片:" : "Example: Input: caption: " + caption(d) + "; image: ");
        add_image_slot(b, d, language);
        const bool sarcastic = *d.label == 1;
        std::string out;
        if (zh) {
            out = std::string(". 输出：是否讽刺:") + (sarcastic ? "是" : "否");
            if (sarcastic) out += "; 讽刺对象:" + *d.target + "; 讽刺解释:" + *d.explanation;
        } else {
            out = std::string(". Output: Sarcastic: ") + (sarcastic ? "yes" : "no");
            if (sarcastic) out += "; Target: " + *d.target + "; Explanation: " + *d.explanation;
        }
        add_text(b, out + ".\n");
    }
    add_text(b, zh ? "Test: 输入：配文:" + caption(query) + "; 图片:" : "Test: Input: caption: " + caption(query) + "; image: ");
    add_image_slot(b, query, language);
    add_text(b, zh ? ".\n给你一张图片,分析该图片是否含有讽刺，并给出讽刺对象和解释。"
                   : ".\nGiven an image, analyze whether it contains sarcasm and provide the target/explanation.");
    return b;
}

std::optional<ParsedResponse> ResponseParser::parse(std::string_view raw) const {
    std::string_view block;
    std::string outside(raw);
    bool has_block = false;
    if (const auto b = raw.find("<result>"); b != std::string_view::npos) {
        const auto e = raw.find("</result>", b);
        if (e != std::string_view::npos) {
            constexpr std::size_t kClose = std::string_view("</result>").size();
            block = raw.substr(b, e + kClose - b);
            outside = std::string(raw.substr(0, b)) + "\n" + std::string(raw.substr(e + kClose));
            has_block = true;
        }
    }
    if (strict_ && !has_block) return std::nullopt;

    const auto verdict = find_verdict(outside);
    if (!verdict) return std::nullopt;
    if (!*verdict) return ParsedResponse(false, {}, {}, std::string(raw));

    std::optional<std::string> target, explanation;
    if (has_block) {
        target = tag_content(block, {"target", "讽刺对象"});
        explanation = tag_content(block, {"explanation", "讽刺解释"});
    } else {
        auto fields = labeled_fields(outside);
        target = std::move(fields[0]);
        explanation = std::move(fields[1]);
    }
    if (!target || !explanation) return std::nullopt;
    return ParsedResponse(true, std::move(*target), std::move(*explanation), std::string(raw));
}

std::optional<ParsedResponse> parse_structured_output(std::string_view raw, bool strict) {
    return ResponseParser(strict).parse(raw);
}

std::string render_tagged(bool sarcastic, std::string_view target, std::string_view explanation, Language language) {
    const bool zh = language == Language::Zh;
    std::string out = zh ? (sarcastic ? "是否讽刺: 是\n" : "是否讽刺: 否\n") : (sarcastic ? "Sarcastic: yes\n" : "Sarcastic: no\n");
    const std::string_view t = sarcastic ? target : std::string_view{};
    const std::string_view x = sarcastic ? explanation : std::string_view{};
    if (zh) {
        out += "<result><讽刺对象>" + escape(t) + "</讽刺对象><讽刺解释>" + escape(x) + "</讽刺解释></result>";
    } else {
        out += "<result><target>" + escape(t) + "</target><explanation>" + escape(x) + "</explanation></result>";
    }
    return out;
}

std::string render_tagged(const ParsedResponse& response, Language language) {
    return render_tagged(response.is_sarcastic(), response.target(), response.explanation(), language);
}

}  // namespace pgds

#include "hipcap/data/vocab.hpp"

#include <algorithm>
#include <cctype>
#include <sstream>

#include <json.hpp>

#include "hipcap/decoder/decoder.hpp"
#include "hipcap/error.hpp"

namespace hipcap {

std::vector<std::string> tokenize(const std::string& caption) {
    std::string lower(caption);
    std::transform(lower.begin(), lower.end(), lower.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    std::vector<std::string> out;
    std::istringstream is(lower);
    std::string tok;
    while (is >> tok) out.push_back(tok);
    return out;
}

Vocab::Vocab() {
    tokens_ = {"<bos>", "<eos>", "<unk>", "<pad>"};
    for (std::size_t i = 0; i < tokens_.size(); ++i) ids_[tokens_[i]] = i;
}

Vocab Vocab::from_tokens(const std::vector<std::string>& kept, std::size_t min_count) {
    Vocab v;
    v.min_count_ = min_count;
    for (const auto& t : kept) {
        if (v.ids_.count(t)) throw InputError("vocabulary token '" + t + "' listed twice");
        v.ids_[t] = v.tokens_.size();
        v.tokens_.push_back(t);
    }
    return v;
}

std::size_t Vocab::id(const std::string& token) const {
    auto it = ids_.find(token);
    return it == ids_.end() ? kUnk : it->second;
}

std::vector<std::size_t> Vocab::encode(const std::string& caption) const {
    std::vector<std::size_t> out{kBos};
    for (const auto& t : tokenize(caption)) out.push_back(id(t));
    out.push_back(kEos);
    return out;
}

std::vector<std::string> Vocab::decode_tokens(std::span<const std::size_t> ids) const {
    std::vector<std::string> out;
    for (auto i : ids) {
        if (i == kEos) break;
        if (i < kSpecialTokens && i != kUnk) continue;
        out.push_back(token(i));
    }
    return out;
}

std::string Vocab::decode(std::span<const std::size_t> ids) const {
    const auto toks = decode_tokens(ids);
    std::string out;
    for (std::size_t i = 0; i < toks.size(); ++i) {
        if (i) out += ' ';
        out += toks[i];
    }
    return out;
}

std::string Vocab::to_json() const {
    nlohmann::ordered_json j;
    j["format"] = "hipcap-vocab";
    j["version"] = 1;
    j["min_count"] = min_count_;
    j["tokens"] = std::vector<std::string>(tokens_.begin() + kSpecialTokens, tokens_.end());
    return j.dump();
}

Vocab Vocab::from_json(const std::string& text) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(text);
    } catch (const nlohmann::json::exception& e) {
        throw InputError(std::string("vocabulary: invalid JSON: ") + e.what());
    }
    if (j.value("format", "") != "hipcap-vocab" || j.value("version", 0) != 1) {
        throw InputError("vocabulary: unsupported format or version");
    }
    return from_tokens(j.at("tokens").get<std::vector<std::string>>(), j.value("min_count", std::size_t{1}));
}

Vocab build_vocab(std::span<const SceneRecord> records, std::size_t min_count) {
    if (min_count < 1) throw InputError("min_count must be at least 1");
    std::map<std::string, std::size_t> counts;
    for (const auto& r : records) {
        for (const auto& c : r.captions) {
            for (const auto& t : tokenize(c)) ++counts[t];
        }
    }
    std::vector<std::string> kept;
    for (const auto& [t, n] : counts) {
        if (n >= min_count) kept.push_back(t);
    }
    return Vocab::from_tokens(kept, min_count);
}

}  // namespace hipcap

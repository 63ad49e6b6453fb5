#pragma once

#include <cstddef>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "hipcap/data/dataset.hpp"

namespace hipcap {

/// Lowercases and splits a caption on whitespace.
std::vector<std::string> tokenize(const std::string& caption);

/// Token <-> id mapping. Ids 0-3 are BOS, EOS, UNK, PAD; kept tokens follow
/// in lexicographic order.
class Vocab {
public:
    Vocab();
    static Vocab from_tokens(const std::vector<std::string>& kept, std::size_t min_count);

    std::size_t size() const noexcept { return tokens_.size(); }
    std::size_t min_count() const noexcept { return min_count_; }
    std::size_t id(const std::string& token) const;  // UNK when absent
    const std::string& token(std::size_t id) const { return tokens_.at(id); }
    bool contains(const std::string& token) const { return ids_.count(token) != 0; }
    const std::vector<std::string>& tokens() const noexcept { return tokens_; }

    /// BOS + ids + EOS.
    std::vector<std::size_t> encode(const std::string& caption) const;
    /// Space-joined tokens, special tokens dropped.
    std::string decode(std::span<const std::size_t> ids) const;
    std::vector<std::string> decode_tokens(std::span<const std::size_t> ids) const;

    std::string to_json() const;
    static Vocab from_json(const std::string& text);

private:
    std::vector<std::string> tokens_;
    std::map<std::string, std::size_t> ids_;
    std::size_t min_count_ = 1;
};

/// Keeps lowercased tokens occurring at least `min_count` times over every
/// caption of `records`.
Vocab build_vocab(std::span<const SceneRecord> records, std::size_t min_count);

}  // namespace hipcap

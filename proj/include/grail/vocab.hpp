#pragma once

#include <algorithm>
#include <array>
#include <filesystem>
#include <map>
#include <sstream>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "grail/common.hpp"

namespace grail {

// Token inventory with dense ids. The first six ids are reserved, in fixed
// order, for padding, the unknown token, and the four entity markers.
class Vocabulary {
public:
    static constexpr int kPad = 0;
    static constexpr int kUnk = 1;
    static constexpr int kE1Open = 2;
    static constexpr int kE1Close = 3;
    static constexpr int kE2Open = 4;
    static constexpr int kE2Close = 5;

    static const std::array<std::string_view, 6>& reserved_tokens() {
        static const std::array<std::string_view, 6> kReserved = {
            "[PAD]", "[UNK]", "[E1]", "[/E1]", "[E2]", "[/E2]"};
        return kReserved;
    }

    Vocabulary() {
        for (auto t : reserved_tokens()) push(std::string(t));
    }

    // Reserved tokens plus every corpus token with frequency >= min_count,
    // ordered by (frequency desc, token asc).
    static Vocabulary build(const std::vector<std::vector<std::string>>& corpora, int min_count) {
        if (min_count < 1) throw std::invalid_argument("build_vocabulary: min_count must be >= 1");
        if (corpora.empty()) throw DataError("build_vocabulary: empty corpus");
        std::map<std::string, long> counts;
        for (const auto& sentence : corpora)
            for (const auto& tok : sentence) ++counts[tok];

        std::vector<std::pair<std::string, long>> items(counts.begin(), counts.end());
        std::sort(items.begin(), items.end(), [](const auto& a, const auto& b) {
            if (a.second != b.second) return a.second > b.second;
            return a.first < b.first;
        });

        Vocabulary v;
        for (const auto& [tok, count] : items) {
            if (count < min_count) continue;
            if (v.index_.count(tok)) continue;  // corpus may contain reserved strings
            v.push(tok);
        }
        return v;
    }

    // Unknown tokens map to [UNK], never an error.
    int id(std::string_view token) const {
        auto it = index_.find(std::string(token));
        return it == index_.end() ? kUnk : it->second;
    }

    bool contains(std::string_view token) const { return index_.count(std::string(token)) != 0; }

    int size() const { return static_cast<int>(tokens_.size()); }

    const std::string& token(int id) const {
        if (id < 0 || id >= size()) throw std::invalid_argument("vocabulary id out of range");
        return tokens_[static_cast<std::size_t>(id)];
    }

    std::vector<int> encode(const std::vector<std::string>& tokens) const {
        std::vector<int> ids;
        ids.reserve(tokens.size());
        for (const auto& t : tokens) ids.push_back(id(t));
        return ids;
    }

    // One token per line; line number = id.
    std::string to_text() const {
        std::ostringstream out;
        for (const auto& t : tokens_) out << t << '\n';
        return out.str();
    }

    void save(const std::filesystem::path& path) const { atomic_write_file(path, to_text()); }

    static Vocabulary from_text(const std::string& text) {
        Vocabulary v;
        v.tokens_.clear();
        v.index_.clear();
        std::istringstream in(text);
        std::string line;
        while (std::getline(in, line)) v.push(line);
        if (v.size() < static_cast<int>(reserved_tokens().size()))
            throw DataError("vocabulary file missing reserved tokens");
        for (std::size_t i = 0; i < reserved_tokens().size(); ++i) {
            if (v.tokens_[i] != reserved_tokens()[i])
                throw DataError("vocabulary file has wrong reserved token order");
        }
        return v;
    }

    static Vocabulary load(const std::filesystem::path& path) {
        return from_text(read_text_file(path));
    }

private:
    void push(std::string tok) {
        index_.emplace(tok, static_cast<int>(tokens_.size()));
        tokens_.push_back(std::move(tok));
    }

    std::vector<std::string> tokens_;
    std::unordered_map<std::string, int> index_;
};

}  // namespace grail

#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace claqs::data {

inline constexpr std::size_t kPad = 0;
inline constexpr std::size_t kUnk = 1;

/// Lowercases ASCII, splits on whitespace, and emits each ASCII punctuation
/// character as its own token.
std::vector<std::string> tokenize(std::string_view text);

struct Record {
  std::size_t label = 0;
  std::string text;

  bool operator==(const Record&) const = default;
};

/// Reads "label<TAB>text" lines. Blank lines are skipped. When `classes` is
/// nonzero, labels must lie in [0, classes).
std::vector<Record> load_tsv(const std::filesystem::path& path, std::size_t classes = 0);
void write_tsv(const std::filesystem::path& path, const std::vector<Record>& records);

class Vocab {
 public:
  Vocab();

  /// Tokens with frequency >= min_freq, most frequent first, ties broken
  /// lexicographically, truncated so the table holds at most max_size ids
  /// (PAD and UNK included).
  static Vocab build(const std::vector<std::vector<std::string>>& corpus, std::size_t min_freq,
                     std::size_t max_size);
  static Vocab from_tokens(std::vector<std::string> tokens);

  std::size_t size() const { return tokens_.size(); }
  std::size_t id(const std::string& token) const;
  const std::string& token(std::size_t id) const { return tokens_.at(id); }
  const std::vector<std::string>& tokens() const { return tokens_; }

  std::vector<std::size_t> encode(const std::vector<std::string>& tokens) const;

 private:
  std::vector<std::string> tokens_;
  std::unordered_map<std::string, std::size_t> index_;
};

struct Window {
  std::vector<std::size_t> ids;
  std::vector<std::uint8_t> mask;  // 1 on non-PAD positions
};

/// Windows start at 0, stride, 2*stride, ... while the start lies inside the
/// sequence; the last one is PAD-padded to `length`. Empty input yields none.
std::vector<Window> make_windows(const std::vector<std::size_t>& ids, std::size_t length,
                                 std::size_t stride);

struct Document {
  std::vector<std::size_t> ids;
  std::size_t label = 0;
  std::vector<Window> windows;
};

std::vector<Document> encode(const std::vector<Record>& records, const Vocab& vocab,
                             std::size_t window, std::size_t stride);

struct Splits {
  std::vector<Record> train;
  std::vector<Record> val;
  std::vector<Record> test;
};

/// Two-class majority-marker task. Each sequence has `length` tokens drawn from
/// two markers ("alpha", "beta") and vocab_size-2 distractors ("w0", ...).
/// Label 0 when alpha outnumbers beta, 1 otherwise; ties are resampled.
/// Classes are balanced exactly and the shuffled set is split 80/10/10.
Splits synth_majority(std::uint64_t seed, std::size_t size, std::size_t length,
                      std::size_t vocab_size);

}  // namespace claqs::data

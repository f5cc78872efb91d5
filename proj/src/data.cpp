#include "data.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <map>

#include "errors.hpp"
#include "rng.hpp"

namespace claqs::data {

std::vector<std::string> tokenize(std::string_view text) {
  std::vector<std::string> tokens;
  std::string current;
  auto flush = [&] {
    if (!current.empty()) tokens.push_back(std::move(current));
    current.clear();
  };
  for (char ch : text) {
    const auto u = static_cast<unsigned char>(ch);
    if (u < 0x80 && std::isspace(u)) {
      flush();
    } else if (u < 0x80 && std::ispunct(u)) {
      flush();
      tokens.emplace_back(1, ch);
    } else {
      current.push_back(u < 0x80 ? static_cast<char>(std::tolower(u)) : ch);
    }
  }
  flush();
  return tokens;
}

std::vector<Record> load_tsv(const std::filesystem::path& path, std::size_t classes) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::Io, "cannot read " + path.string());
  std::vector<Record> records;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto where = path.string() + ":" + std::to_string(line_no);
    const auto tab = line.find('\t');
    if (tab == std::string::npos) throw Error(ErrorKind::Parse, where + ": missing tab separator");
    const std::string label = line.substr(0, tab);
    if (label.empty() || !std::all_of(label.begin(), label.end(),
                                      [](unsigned char c) { return std::isdigit(c); })) {
      throw Error(ErrorKind::Parse, where + ": label '" + label + "' is not a class id");
    }
    std::size_t value = 0;
    try {
      value = std::stoull(label);
    } catch (const std::exception&) {
      throw Error(ErrorKind::Parse, where + ": label '" + label + "' is out of range");
    }
    if (classes != 0 && value >= classes) {
      throw Error(ErrorKind::Parse, where + ": label " + label + " not in [0, " +
                                        std::to_string(classes) + ")");
    }
    records.push_back({value, line.substr(tab + 1)});
  }
  if (in.bad()) throw Error(ErrorKind::Io, "read failure on " + path.string());
  return records;
}

void write_tsv(const std::filesystem::path& path, const std::vector<Record>& records) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorKind::Io, "cannot write " + path.string());
  for (const auto& r : records) out << r.label << '\t' << r.text << '\n';
  if (!out) throw Error(ErrorKind::Io, "write failure on " + path.string());
}

Vocab::Vocab() : tokens_{"<pad>", "<unk>"}, index_{{"<pad>", kPad}, {"<unk>", kUnk}} {}

Vocab Vocab::from_tokens(std::vector<std::string> tokens) {
  Vocab v;
  v.tokens_ = {"<pad>", "<unk>"};
  v.index_.clear();
  for (auto& t : tokens) {
    if (t == "<pad>" || t == "<unk>") continue;
    v.tokens_.push_back(std::move(t));
  }
  for (std::size_t i = 0; i < v.tokens_.size(); ++i) v.index_.emplace(v.tokens_[i], i);
  return v;
}

Vocab Vocab::build(const std::vector<std::vector<std::string>>& corpus, std::size_t min_freq,
                   std::size_t max_size) {
  std::map<std::string, std::size_t> counts;
  for (const auto& doc : corpus)
    for (const auto& tok : doc) ++counts[tok];
  std::vector<std::pair<std::string, std::size_t>> ranked;
  for (auto& [tok, n] : counts) {
    if (n >= min_freq && tok != "<pad>" && tok != "<unk>") ranked.emplace_back(tok, n);
  }
  std::stable_sort(ranked.begin(), ranked.end(),
                   [](const auto& a, const auto& b) { return a.second > b.second; });
  const std::size_t room = max_size > 2 ? max_size - 2 : 0;
  if (ranked.size() > room) ranked.resize(room);
  std::vector<std::string> tokens;
  tokens.reserve(ranked.size());
  for (auto& [tok, n] : ranked) tokens.push_back(tok);
  return from_tokens(std::move(tokens));
}

std::size_t Vocab::id(const std::string& token) const {
  auto it = index_.find(token);
  return it == index_.end() ? kUnk : it->second;
}

std::vector<std::size_t> Vocab::encode(const std::vector<std::string>& tokens) const {
  std::vector<std::size_t> ids;
  ids.reserve(tokens.size());
  for (const auto& t : tokens) ids.push_back(id(t));
  return ids;
}

std::vector<Window> make_windows(const std::vector<std::size_t>& ids, std::size_t length,
                                 std::size_t stride) {
  if (length == 0 || stride == 0) throw Error(ErrorKind::Input, "window length and stride must be >= 1");
  std::vector<Window> windows;
  for (std::size_t start = 0; start < ids.size(); start += stride) {
    Window w;
    w.ids.assign(length, kPad);
    w.mask.assign(length, 0);
    for (std::size_t j = 0; j < length && start + j < ids.size(); ++j) {
      w.ids[j] = ids[start + j];
      w.mask[j] = w.ids[j] != kPad;
    }
    windows.push_back(std::move(w));
  }
  return windows;
}

std::vector<Document> encode(const std::vector<Record>& records, const Vocab& vocab,
                             std::size_t window, std::size_t stride) {
  std::vector<Document> docs;
  docs.reserve(records.size());
  for (const auto& r : records) {
    Document d;
    d.ids = vocab.encode(tokenize(r.text));
    d.label = r.label;
    d.windows = make_windows(d.ids, window, stride);
    docs.push_back(std::move(d));
  }
  return docs;
}

Splits synth_majority(std::uint64_t seed, std::size_t size, std::size_t length,
                      std::size_t vocab_size) {
  if (vocab_size < 2) throw Error(ErrorKind::Input, "synthetic vocab needs at least two markers");
  if (length == 0) throw Error(ErrorKind::Input, "synthetic sequence length must be >= 1");
  Rng rng(seed);
  const std::size_t distractors = vocab_size - 2;
  std::vector<Record> all;
  all.reserve(size);
  for (std::size_t i = 0; i < size; ++i) {
    const std::size_t want = i % 2;
    while (true) {
      std::size_t alpha = 0, beta = 0;
      std::string text;
      for (std::size_t j = 0; j < length; ++j) {
        const double u = rng.uniform();
        std::string tok;
        if (distractors == 0 || u < 0.3) {
          tok = (distractors == 0 && u >= 0.5) ? "beta" : "alpha";
        } else if (u < 0.6) {
          tok = "beta";
        } else {
          tok = "w" + std::to_string(rng.below(distractors));
        }
        alpha += tok == "alpha";
        beta += tok == "beta";
        if (!text.empty()) text.push_back(' ');
        text += tok;
      }
      if (alpha == beta) continue;
      const std::size_t label = alpha > beta ? 0 : 1;
      if (label != want) continue;
      all.push_back({label, std::move(text)});
      break;
    }
  }
  rng.shuffle(all);
  Splits s;
  const std::size_t n_train = size * 8 / 10;
  const std::size_t n_val = size / 10;
  s.train.assign(all.begin(), all.begin() + n_train);
  s.val.assign(all.begin() + n_train, all.begin() + n_train + n_val);
  s.test.assign(all.begin() + n_train + n_val, all.end());
  return s;
}

}  // namespace claqs::data

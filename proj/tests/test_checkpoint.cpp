#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <iterator>

#include "checkpoint.hpp"
#include "errors.hpp"

using namespace claqs;
namespace fs = std::filesystem;

namespace {

checkpoint::Checkpoint sample() {
  ModelConfig m;
  m.qubits = 3;
  m.window = 4;
  m.layers = 1;
  m.ff_layers = 1;
  m.degree = 2;
  m.embed_dim = 3;
  m.hidden = 4;
  checkpoint::Checkpoint c;
  c.config_json = R"({"seed":1})";
  c.step = 42;
  c.epoch = 3;
  c.rng_state = "1 2 3";
  c.vocab = {"<pad>", "<unk>", "alpha", "beta"};
  c.params = model::init_params(m, 4, 9);
  return c;
}

fs::path temp(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / "claqs_tests";
  fs::create_directories(dir);
  return dir / name;
}

std::string read_bytes(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), {}};
}

void expect_parse_error(const fs::path& p) {
  try {
    checkpoint::load(p);
    FAIL("expected a parse error");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::Parse);
  }
}

}  // namespace

TEST_CASE("checkpoint round trip") {
  const auto c = sample();
  const auto p = temp("ckpt.bin");
  checkpoint::save(p, c);
  const auto back = checkpoint::load(p);
  CHECK(back.config_json == c.config_json);
  CHECK(back.step == 42);
  CHECK(back.epoch == 3);
  CHECK(back.rng_state == c.rng_state);
  CHECK(back.vocab == c.vocab);
  REQUIRE(back.params.list.size() == c.params.list.size());
  for (std::size_t i = 0; i < c.params.list.size(); ++i) {
    const auto& a = c.params.list[i];
    const auto& b = back.params.list[i];
    CHECK(a.name == b.name);
    CHECK(a.group == b.group);
    CHECK(a.shape == b.shape);
    CHECK(a.real_valued == b.real_valued);
    CHECK(a.decay == b.decay);
    CHECK(a.value == b.value);
  }
  // Saving again is byte-identical.
  const auto p2 = temp("ckpt2.bin");
  checkpoint::save(p2, back);
  CHECK(read_bytes(p) == read_bytes(p2));
  CHECK(read_bytes(p).substr(0, 8) == "CLAQSCKP");
}

TEST_CASE("damaged checkpoints") {
  const auto p = temp("ckpt_src.bin");
  checkpoint::save(p, sample());
  const std::string bytes = read_bytes(p);

  const auto truncated = temp("ckpt_trunc.bin");
  std::ofstream(truncated, std::ios::binary) << bytes.substr(0, bytes.size() / 2);
  expect_parse_error(truncated);

  auto magic = bytes;
  magic[0] = 'X';
  const auto bad_magic = temp("ckpt_magic.bin");
  std::ofstream(bad_magic, std::ios::binary) << magic;
  expect_parse_error(bad_magic);

  const auto trailing = temp("ckpt_trailing.bin");
  std::ofstream(trailing, std::ios::binary) << bytes << "x";
  expect_parse_error(trailing);

  try {
    checkpoint::load(temp("no_such_checkpoint.bin"));
    FAIL("expected an I/O error");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::Io);
  }
}

#include "test_support.hpp"

#include <fcntl.h>
#include <sys/wait.h>
#include <unistd.h>

#include <fstream>
#include <sstream>

namespace tmtest {

namespace fs = std::filesystem;

std::string random_cell(Rng& rng) {
  static const std::vector<std::string> words = {"alpha", "Beta", "gamma ray", "Zürich", "naïve", "O'Neil",
                                                  "a|b",   "x,y",  "say \"hi\"", "  padded ", "-", "N/A"};
  switch (uniform(rng, 0, 6)) {
    case 0: return pick(rng, words);
    case 1: return std::to_string(uniform(rng, 0, 100000));
    case 2: return std::to_string(uniform(rng, 0, 999)) + "." + std::to_string(uniform(rng, 0, 99));
    case 3: return "20" + std::to_string(10 + uniform(rng, 0, 9)) + "-0" + std::to_string(uniform(rng, 1, 9)) + "-1" +
                   std::to_string(uniform(rng, 0, 9));
    case 4: return "";
    case 5: return pick(rng, words) + " " + std::to_string(uniform(rng, 0, 9));
    default: {
      std::string s;
      for (std::size_t i = 0, n = uniform(rng, 1, 6); i < n; ++i) s += static_cast<char>('a' + uniform(rng, 0, 25));
      return s;
    }
  }
}

tablemaster::Table random_table(Rng& rng, std::size_t max_rows, std::size_t max_cols, std::size_t min_cols) {
  std::size_t cols = uniform(rng, min_cols, max_cols);
  std::size_t rows = uniform(rng, 0, max_rows);
  std::vector<std::string> headers;
  for (std::size_t j = 0; j < cols; ++j) headers.push_back("col " + std::to_string(j) + (coin(rng, 0.2) ? "|x" : ""));
  std::vector<tablemaster::Row> body;
  for (std::size_t i = 0; i < rows; ++i) {
    tablemaster::Row r;
    for (std::size_t j = 0; j < cols; ++j) r.push_back(random_cell(rng));
    body.push_back(std::move(r));
  }
  return tablemaster::Table(std::move(headers), std::move(body));
}

TempDir::TempDir() {
  std::string tmpl = (fs::temp_directory_path() / "tm-test-XXXXXX").string();
  if (!mkdtemp(tmpl.data())) throw std::runtime_error("mkdtemp failed");
  path_ = tmpl;
}

TempDir::~TempDir() {
  std::error_code ec;
  fs::remove_all(path_, ec);
}

namespace {

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

}  // namespace

CommandResult run_cli(const std::vector<std::string>& args, const std::string& stdin_text) {
  TempDir io;
  const fs::path in = io.path() / "stdin", out = io.path() / "stdout", err = io.path() / "stderr";
  std::ofstream(in, std::ios::binary) << stdin_text;
  std::vector<std::string> argv_store = {cli_path().string()};
  argv_store.insert(argv_store.end(), args.begin(), args.end());
  std::vector<char*> argv;
  for (auto& a : argv_store) argv.push_back(a.data());
  argv.push_back(nullptr);

  pid_t pid = fork();
  if (pid == 0) {
    int fi = open(in.c_str(), O_RDONLY);
    int fo = open(out.c_str(), O_WRONLY | O_CREAT | O_TRUNC, 0600);
    int fe = open(err.c_str(), O_WRONLY | O_CREAT | O_TRUNC, 0600);
    dup2(fi, 0);
    dup2(fo, 1);
    dup2(fe, 2);
    execv(argv[0], argv.data());
    _exit(127);
  }
  int status = 0;
  waitpid(pid, &status, 0);
  CommandResult r;
  r.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  r.out = slurp(out);
  r.err = slurp(err);
  return r;
}

}  // namespace tmtest

// Serves the deterministic mock model over standard streams (one JSON
// request per line in, one response per line out) or a Unix socket.

#include <csignal>
#include <iostream>
#include <memory>
#include <string>

#include "CLI11.hpp"
#include "newscap/corpus.hpp"
#include "newscap/error.hpp"
#include "newscap/gateway.hpp"
#include "newscap/ner.hpp"

namespace {

std::atomic<bool> g_stop{false};

void on_signal(int) { g_stop = true; }

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Deterministic mock captioning model", "newscap-mock-model"};
  std::string corpus_dir;
  std::string gazetteer_path;
  std::string socket_path;
  app.add_option("--corpus", corpus_dir, "Corpus directory holding the captions")
      ->required();
  app.add_option("--gazetteer", gazetteer_path, "Gazetteer TSV");
  app.add_option("--socket", socket_path, "Serve on this Unix socket instead of stdio");
  CLI11_PARSE(app, argc, argv);

  try {
    newscap::Gazetteer gaz;
    if (!gazetteer_path.empty()) gaz = newscap::Gazetteer::load(gazetteer_path);
    const auto corpus = newscap::read_corpus_dir(corpus_dir);
    const auto mock = newscap::MockModel::from_corpus(
        std::make_shared<newscap::GazetteerTagger>(std::move(gaz), false), corpus);
    if (socket_path.empty()) {
      newscap::serve_stream(std::cin, std::cout, mock.line_handler());
      return 0;
    }
    newscap::UnixSocketServer server(socket_path, mock.line_handler());
    std::signal(SIGINT, on_signal);
    std::signal(SIGTERM, on_signal);
    server.start();
    while (!g_stop) std::this_thread::sleep_for(std::chrono::milliseconds(50));
    server.stop();
    return 0;
  } catch (const newscap::Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
}

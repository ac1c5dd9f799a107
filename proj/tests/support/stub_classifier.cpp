// Test double speaking the external classifier wire protocol.
//
//   stub_classifier yes            VOCAB yes no; every request -> LABEL yes
//   stub_classifier badlabel       answers a label outside its vocabulary
//   stub_classifier die-after N    exits without replying to request N + 1
//   stub_classifier error          ERROR on every second request, else LABEL yes
//   stub_classifier toy            runs the band-energy classifier on the WAV
//   stub_classifier mute           never completes the handshake
//   stub_classifier garbage        sends a malformed handshake

#include <chrono>
#include <cstdlib>
#include <iostream>
#include <string>
#include <thread>

#include <noiseflood/audio.hpp>
#include <noiseflood/classifier.hpp>

int main(int argc, char** argv) {
  const std::string mode = argc > 1 ? argv[1] : "yes";
  const int die_after = argc > 2 ? std::atoi(argv[2]) : 0;

  if (mode == "mute") {
    std::this_thread::sleep_for(std::chrono::seconds(30));
    return 0;
  }
  if (mode == "garbage") {
    std::cout << "HELLO there\n" << std::flush;
    std::this_thread::sleep_for(std::chrono::seconds(30));
    return 0;
  }

  nflood::BandEnergyClassifier toy;
  if (mode == "toy") {
    std::cout << "VOCAB";
    for (const auto& l : toy.vocabulary()) std::cout << ' ' << l;
    std::cout << '\n';
  } else {
    std::cout << "VOCAB yes no\n";
  }
  std::cout << "READY\n" << std::flush;

  int served = 0;
  for (std::string line; std::getline(std::cin, line);) {
    if (line == "QUIT") return 0;
    if (line.rfind("CLASSIFY ", 0) != 0) {
      std::cout << "ERROR unknown request\n" << std::flush;
      continue;
    }
    if (mode == "die-after" && served >= die_after) return 7;
    ++served;
    const std::string path = line.substr(9);
    if (mode == "badlabel") {
      std::cout << "LABEL maybe\n" << std::flush;
    } else if (mode == "error" && served % 2 == 0) {
      std::cout << "ERROR cannot decode " << path << '\n' << std::flush;
    } else if (mode == "toy") {
      try {
        std::cout << "LABEL " << toy.classify(nflood::load_wav(path)) << '\n' << std::flush;
      } catch (const std::exception& e) {
        std::cout << "ERROR " << e.what() << '\n' << std::flush;
      }
    } else {
      std::cout << "LABEL yes\n" << std::flush;
    }
  }
  return 0;
}

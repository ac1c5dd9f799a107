#include <fcntl.h>
#include <poll.h>
#include <signal.h>
#include <sys/types.h>
#include <sys/wait.h>
#include <unistd.h>

#include <algorithm>
#include <atomic>
#include <cerrno>
#include <cstring>
#include <filesystem>
#include <mutex>
#include <sstream>
#include <thread>

#include "noiseflood/classifier.hpp"
#include "noiseflood/errors.hpp"

namespace nflood {
namespace {

void ignore_sigpipe_once() {
  static std::once_flag flag;
  std::call_once(flag, [] { ::signal(SIGPIPE, SIG_IGN); });
}

class Fd {
 public:
  Fd() = default;
  explicit Fd(int fd) : fd_(fd) {}
  Fd(Fd&& other) noexcept : fd_(std::exchange(other.fd_, -1)) {}
  Fd& operator=(Fd&& other) noexcept {
    if (this != &other) {
      reset();
      fd_ = std::exchange(other.fd_, -1);
    }
    return *this;
  }
  ~Fd() { reset(); }

  int get() const noexcept { return fd_; }
  void reset() noexcept {
    if (fd_ >= 0) ::close(fd_);
    fd_ = -1;
  }

 private:
  int fd_ = -1;
};

struct Pipe {
  Fd read;
  Fd write;
};

Pipe make_pipe(int flags = 0) {
  int fds[2];
  if (::pipe2(fds, flags) != 0) {
    throw SpawnError(std::string("pipe: ") + std::strerror(errno));
  }
  return Pipe{Fd(fds[0]), Fd(fds[1])};
}

}  // namespace

struct ExternalClassifier::Impl {
  pid_t pid = -1;
  Fd to_child;
  Fd from_child;
  std::string buffer;
  std::vector<Label> vocabulary;
  std::chrono::milliseconds timeout{kDefaultResponseTimeout};
  std::filesystem::path scratch_dir;
  std::mutex mutex;

  enum class ReadStatus { Line, Eof, Timeout };

  ReadStatus read_line(std::string& line) {
    const auto deadline = std::chrono::steady_clock::now() + timeout;
    for (;;) {
      if (auto nl = buffer.find('\n'); nl != std::string::npos) {
        line = buffer.substr(0, nl);
        buffer.erase(0, nl + 1);
        if (!line.empty() && line.back() == '\r') line.pop_back();
        return ReadStatus::Line;
      }
      const auto left = std::chrono::duration_cast<std::chrono::milliseconds>(
          deadline - std::chrono::steady_clock::now());
      if (left.count() <= 0) return ReadStatus::Timeout;
      pollfd pfd{from_child.get(), POLLIN, 0};
      const int ready = ::poll(&pfd, 1, static_cast<int>(left.count()));
      if (ready < 0) {
        if (errno == EINTR) continue;
        return ReadStatus::Eof;
      }
      if (ready == 0) return ReadStatus::Timeout;
      char chunk[4096];
      const ssize_t got = ::read(from_child.get(), chunk, sizeof(chunk));
      if (got < 0 && errno == EINTR) continue;
      if (got <= 0) return ReadStatus::Eof;
      buffer.append(chunk, static_cast<std::size_t>(got));
    }
  }

  bool write_all(const std::string& text) {
    std::size_t done = 0;
    while (done < text.size()) {
      const ssize_t n = ::write(to_child.get(), text.data() + done, text.size() - done);
      if (n < 0 && errno == EINTR) continue;
      if (n <= 0) return false;
      done += static_cast<std::size_t>(n);
    }
    return true;
  }

  void shutdown() {
    if (pid <= 0) return;
    if (to_child.get() >= 0) {
      write_all("QUIT\n");
      to_child.reset();
    }
    int status = 0;
    for (int i = 0; i < 100; ++i) {
      if (::waitpid(pid, &status, WNOHANG) != 0) {
        pid = -1;
        break;
      }
      std::this_thread::sleep_for(std::chrono::milliseconds(10));
    }
    if (pid > 0) {
      ::kill(pid, SIGKILL);
      ::waitpid(pid, &status, 0);
      pid = -1;
    }
    from_child.reset();
    std::error_code ec;
    if (!scratch_dir.empty()) std::filesystem::remove_all(scratch_dir, ec);
  }
};

ExternalClassifier::ExternalClassifier(std::unique_ptr<Impl> impl) : impl_(std::move(impl)) {}

ExternalClassifier::~ExternalClassifier() {
  if (impl_) impl_->shutdown();
}

const std::vector<Label>& ExternalClassifier::vocabulary() const { return impl_->vocabulary; }

int ExternalClassifier::pid() const noexcept { return impl_->pid; }

Label ExternalClassifier::do_classify(const AudioSignal& x) {
  std::lock_guard lock(impl_->mutex);
  if (impl_->pid <= 0) throw ClassifierError("external classifier is not running");

  const auto wav = impl_->scratch_dir / "request.wav";
  save_wav(x, wav);
  if (!impl_->write_all("CLASSIFY " + wav.string() + "\n")) {
    throw ClassifierError("external classifier (pid " + std::to_string(impl_->pid) +
                          ") stopped accepting requests");
  }

  std::string line;
  switch (impl_->read_line(line)) {
    case Impl::ReadStatus::Eof:
      throw ClassifierError("external classifier (pid " + std::to_string(impl_->pid) +
                            ") exited mid-session");
    case Impl::ReadStatus::Timeout:
      throw ClassifierError("external classifier timed out after " +
                            std::to_string(impl_->timeout.count()) + " ms");
    case Impl::ReadStatus::Line:
      break;
  }

  if (line.rfind("ERROR", 0) == 0) {
    throw ClassifierError("external classifier reported: " + line);
  }
  if (line.rfind("LABEL ", 0) != 0) {
    throw ProtocolError("expected 'LABEL <label>', got '" + line + "'");
  }
  Label label = line.substr(6);
  const auto& vocab = impl_->vocabulary;
  if (std::find(vocab.begin(), vocab.end(), label) == vocab.end()) {
    throw ProtocolError("label '" + label + "' is not in the declared vocabulary");
  }
  return label;
}

std::unique_ptr<ExternalClassifier> spawn_external(const std::vector<std::string>& argv,
                                                   std::chrono::milliseconds timeout) {
  if (argv.empty()) throw SpawnError("empty classifier command");
  ignore_sigpipe_once();

  Pipe to_child = make_pipe(O_CLOEXEC);
  Pipe from_child = make_pipe(O_CLOEXEC);
  Pipe exec_status = make_pipe(O_CLOEXEC);

  std::vector<char*> args;
  for (const auto& a : argv) args.push_back(const_cast<char*>(a.c_str()));
  args.push_back(nullptr);

  const pid_t pid = ::fork();
  if (pid < 0) throw SpawnError(std::string("fork: ") + std::strerror(errno));
  if (pid == 0) {
    ::dup2(to_child.read.get(), STDIN_FILENO);
    ::dup2(from_child.write.get(), STDOUT_FILENO);
    ::execvp(args[0], args.data());
    const int err = errno;
    [[maybe_unused]] auto ignored = ::write(exec_status.write.get(), &err, sizeof(err));
    ::_exit(127);
  }

  to_child.read.reset();
  from_child.write.reset();
  exec_status.write.reset();

  auto impl = std::make_unique<ExternalClassifier::Impl>();
  impl->pid = pid;
  impl->to_child = std::move(to_child.write);
  impl->from_child = std::move(from_child.read);
  impl->timeout = timeout;

  int exec_errno = 0;
  ssize_t got = 0;
  do {
    got = ::read(exec_status.read.get(), &exec_errno, sizeof(exec_errno));
  } while (got < 0 && errno == EINTR);
  if (got > 0) {
    impl->to_child.reset();
    int status = 0;
    ::waitpid(pid, &status, 0);
    impl->pid = -1;
    throw SpawnError("cannot start '" + argv[0] + "': " + std::strerror(exec_errno));
  }

  auto fail = [&](const std::string& why) {
    impl->shutdown();
    return SpawnError("classifier '" + argv[0] + "' handshake failed: " + why);
  };

  bool have_vocab = false;
  for (;;) {
    std::string line;
    const auto status = impl->read_line(line);
    if (status == ExternalClassifier::Impl::ReadStatus::Timeout) throw fail("timed out");
    if (status == ExternalClassifier::Impl::ReadStatus::Eof) throw fail("process exited");
    if (line.rfind("VOCAB", 0) == 0) {
      std::istringstream words(line.substr(5));
      impl->vocabulary.clear();
      for (std::string w; words >> w;) impl->vocabulary.push_back(w);
      have_vocab = true;
    } else if (line == "READY") {
      break;
    } else {
      throw fail("unexpected line '" + line + "'");
    }
  }
  if (!have_vocab || impl->vocabulary.empty()) throw fail("no VOCAB before READY");

  static std::atomic<unsigned> counter{0};
  impl->scratch_dir = std::filesystem::temp_directory_path() /
                      ("nflood-" + std::to_string(::getpid()) + "-" + std::to_string(pid) +
                       "-" + std::to_string(counter.fetch_add(1)));
  std::filesystem::create_directories(impl->scratch_dir);
  impl->scratch_dir = std::filesystem::absolute(impl->scratch_dir);

  return std::unique_ptr<ExternalClassifier>(new ExternalClassifier(std::move(impl)));
}

}  // namespace nflood

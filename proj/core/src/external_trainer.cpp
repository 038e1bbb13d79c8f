#include "unseg/external_trainer.hpp"

#include <fcntl.h>
#include <signal.h>
#include <sys/wait.h>
#include <unistd.h>

#include <algorithm>
#include <cerrno>
#include <chrono>
#include <fstream>
#include <nlohmann/json.hpp>
#include <sstream>
#include <thread>

#include "unseg/error.hpp"

extern char** environ;

namespace unseg {
namespace fs = std::filesystem;

namespace {

std::string substitute(std::string s, const std::string& key, const std::string& value) {
  for (auto pos = s.find(key); pos != std::string::npos; pos = s.find(key, pos + value.size())) {
    s.replace(pos, key.size(), value);
  }
  return s;
}

std::string log_tail(const fs::path& log, std::size_t limit = 4096) {
  std::ifstream in(log, std::ios::binary);
  std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return text.size() > limit ? text.substr(text.size() - limit) : text;
}

struct ExitStatus {
  bool timed_out = false;
  int code = 0;
  bool signaled = false;
};

ExitStatus run_command(const std::string& command, const std::vector<std::string>& extra_env,
                       const fs::path& log, double timeout_seconds) {
  std::vector<std::string> env_storage;
  for (char** e = environ; e && *e; ++e) {
    std::string entry(*e);
    const bool overridden = std::any_of(extra_env.begin(), extra_env.end(), [&](const auto& x) {
      return entry.compare(0, x.find('=') + 1, x, 0, x.find('=') + 1) == 0;
    });
    if (!overridden) env_storage.push_back(std::move(entry));
  }
  env_storage.insert(env_storage.end(), extra_env.begin(), extra_env.end());
  std::vector<char*> envp;
  for (auto& s : env_storage) envp.push_back(s.data());
  envp.push_back(nullptr);
  std::string sh = "/bin/sh", dash_c = "-c", cmd = command;
  char* argv[] = {sh.data(), dash_c.data(), cmd.data(), nullptr};

  const int log_fd = ::open(log.c_str(), O_WRONLY | O_CREAT | O_TRUNC | O_CLOEXEC, 0644);
  if (log_fd < 0) throw Error(Errc::io, "cannot create " + log.string());
  const pid_t pid = ::fork();
  if (pid < 0) {
    ::close(log_fd);
    throw Error(Errc::trainer_failure, "fork failed");
  }
  if (pid == 0) {
    ::setpgid(0, 0);
    ::dup2(log_fd, STDOUT_FILENO);
    ::dup2(log_fd, STDERR_FILENO);
    ::execve("/bin/sh", argv, envp.data());
    ::_exit(127);
  }
  ::close(log_fd);
  ::setpgid(pid, pid);

  const auto deadline = std::chrono::steady_clock::now() +
                        std::chrono::duration_cast<std::chrono::steady_clock::duration>(
                            std::chrono::duration<double>(timeout_seconds));
  ExitStatus status;
  int raw = 0;
  for (;;) {
    const pid_t r = ::waitpid(pid, &raw, WNOHANG);
    if (r == pid) break;
    if (r < 0 && errno != EINTR) throw Error(Errc::trainer_failure, "waitpid failed");
    if (std::chrono::steady_clock::now() >= deadline) {
      ::kill(-pid, SIGKILL);
      ::kill(pid, SIGKILL);
      ::waitpid(pid, &raw, 0);
      status.timed_out = true;
      return status;
    }
    std::this_thread::sleep_for(std::chrono::milliseconds(5));
  }
  if (WIFEXITED(raw)) {
    status.code = WEXITSTATUS(raw);
  } else if (WIFSIGNALED(raw)) {
    status.signaled = true;
    status.code = WTERMSIG(raw);
  }
  return status;
}

void reset_dir(const fs::path& dir) {
  fs::remove_all(dir);
  fs::create_directories(dir);
}

}  // namespace

void to_json(nlohmann::json& j, const ExternalTrainerContract& c) {
  j = nlohmann::json{{"command", c.command},
                     {"workspace", c.workspace.string()},
                     {"timeout_seconds", c.timeout_seconds},
                     {"success_exit_codes", c.success_exit_codes}};
}

void from_json(const nlohmann::json& j, ExternalTrainerContract& c) {
  c.command = j.at("command").get<std::string>();
  c.workspace = j.value("workspace", std::string{});
  c.timeout_seconds = j.value("timeout_seconds", 24 * 3600.0);
  c.success_exit_codes = j.value("success_exit_codes", std::vector<int>{0});
}

fs::path run_external_trainer(const ExternalTrainerContract& contract,
                              const std::vector<TrainerImage>& images,
                              const MaskSet& pseudo_masks, int num_classes) {
  if (contract.command.empty()) throw Error(Errc::invalid_argument, "empty trainer command");
  if (contract.workspace.empty()) throw Error(Errc::invalid_argument, "no trainer workspace");
  if (!(contract.timeout_seconds > 0.0)) {
    throw Error(Errc::invalid_argument, "trainer timeout must be positive");
  }
  const fs::path ws = fs::absolute(contract.workspace);
  const fs::path images_dir = ws / "images";
  const fs::path masks_dir = ws / "pseudomasks";
  const fs::path pred_dir = ws / "predictions";
  reset_dir(images_dir);
  reset_dir(masks_dir);
  reset_dir(pred_dir);

  std::map<std::string, ImageSize> sizes;
  for (const auto& img : images) {
    const fs::path dst = images_dir / (img.image_id + ".png");
    std::string ext = img.image_path.extension().string();
    std::transform(ext.begin(), ext.end(), ext.begin(), ::tolower);
    if (ext == ".png") {
      fs::copy_file(img.image_path, dst, fs::copy_options::overwrite_existing);
    } else {
      write_rgb_png(read_rgb(img.image_path), dst);
    }
    sizes[img.image_id] = read_image_size(dst);
  }
  for (const auto& [id, mask] : pseudo_masks) {
    auto it = sizes.find(id);
    if (it == sizes.end()) continue;
    if (it->second != ImageSize{mask.width, mask.height}) {
      throw Error(Errc::dimension_mismatch, id + ": pseudo-mask size differs from the image");
    }
    write_mask(mask, masks_dir / (id + ".png"));
  }
  {
    nlohmann::json j = contract;
    j["workspace"] = ws.string();
    j["num_classes"] = num_classes;
    std::ofstream(ws / "contract.json") << j.dump(2) << '\n';
  }

  const std::string n = std::to_string(num_classes);
  const std::string cmd =
      substitute(substitute(contract.command, "{workspace}", ws.string()), "{num_classes}", n);
  const fs::path log = ws / "trainer.log";
  const auto status =
      run_command(cmd, {"WORKSPACE=" + ws.string(), "NUM_CLASSES=" + n}, log, contract.timeout_seconds);
  if (status.timed_out) {
    throw Error(Errc::timeout, "trainer exceeded " + std::to_string(contract.timeout_seconds) +
                                   " s; output:\n" + log_tail(log));
  }
  const bool ok = !status.signaled &&
                  std::find(contract.success_exit_codes.begin(), contract.success_exit_codes.end(),
                            status.code) != contract.success_exit_codes.end();
  if (!ok) {
    throw Error(Errc::trainer_failure,
                std::string(status.signaled ? "trainer killed by signal " : "trainer exited with ") +
                    std::to_string(status.code) + "; output:\n" + log_tail(log));
  }

  std::ostringstream problems;
  for (const auto& img : images) {
    const fs::path p = pred_dir / (img.image_id + ".png");
    if (!fs::exists(p)) {
      problems << "\n  " << img.image_id << ": missing prediction";
      continue;
    }
    LabelMask m;
    try {
      m = read_mask(p);
    } catch (const Error& e) {
      problems << "\n  " << img.image_id << ": malformed prediction (" << e.what() << ")";
      continue;
    }
    const auto want = sizes[img.image_id];
    if (m.width != want.width || m.height != want.height) {
      problems << "\n  " << img.image_id << ": prediction is " << m.width << "x" << m.height
               << ", image is " << want.width << "x" << want.height;
      continue;
    }
    for (auto v : m.labels) {
      if (v != kIgnoreLabel && v > num_classes) {
        problems << "\n  " << img.image_id << ": label " << static_cast<int>(v)
                 << " exceeds class count " << num_classes;
        break;
      }
    }
  }
  const auto report = problems.str();
  if (!report.empty()) throw Error(Errc::validation, "invalid trainer predictions:" + report);
  return pred_dir;
}

}  // namespace unseg

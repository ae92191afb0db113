#include "deep_stack.hpp"

#include <pthread.h>

#include <cstring>
#include <stdexcept>
#include <string>

namespace pcf::detail {

namespace {

thread_local bool t_large = false;

constexpr std::size_t kLargeStackBytes = std::size_t{1} << 30;

struct Job {
  const std::function<void()>* fn;
  std::exception_ptr error;
};

void* trampoline(void* arg) {
  auto* job = static_cast<Job*>(arg);
  t_large = true;
  try {
    (*job->fn)();
  } catch (...) {
    job->error = std::current_exception();
  }
  return nullptr;
}

}  // namespace

bool on_large_stack() noexcept { return t_large; }

void run_on_large_stack(const std::function<void()>& fn) {
  Job job{&fn, nullptr};
  pthread_attr_t attr;
  pthread_attr_init(&attr);
  pthread_attr_setstacksize(&attr, kLargeStackBytes);
  pthread_t tid;
  const int rc = pthread_create(&tid, &attr, trampoline, &job);
  pthread_attr_destroy(&attr);
  if (rc != 0) throw std::runtime_error(std::string("cannot start deep-recursion thread: ") + std::strerror(rc));
  pthread_join(tid, nullptr);
  if (job.error) std::rethrow_exception(job.error);
}

}  // namespace pcf::detail

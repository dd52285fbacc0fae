#include <atomic>
#include <cstdlib>
#include <string>
#include <string_view>

#include "hesim/error.hpp"
#include "kernels/kernel_table.hpp"

namespace hesim::kernels {
namespace {

bool cpu_has_avx2() {
#if defined(__x86_64__) && (defined(__GNUC__) || defined(__clang__))
  __builtin_cpu_init();
  return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
#else
  return false;
#endif
}

const detail::KernelTable* table_for(Backend b) {
  switch (b) {
    case Backend::Scalar:
      return &detail::scalar_table();
    case Backend::Avx2:
      return cpu_has_avx2() ? detail::avx2_table() : nullptr;
  }
  return nullptr;
}

Backend initial_backend() {
  if (const char* env = std::getenv("HESIM_KERNELS")) {
    if (std::string_view(env) == "scalar") return Backend::Scalar;
  }
  return table_for(Backend::Avx2) != nullptr ? Backend::Avx2 : Backend::Scalar;
}

struct State {
  std::atomic<Backend> backend{initial_backend()};
};

State& state() {
  static State s;
  return s;
}

const detail::KernelTable& active() { return *table_for(state().backend.load()); }

void require_same(std::size_t a, std::size_t b, const char* what) {
  if (a != b) {
    throw Error(ErrorCode::InvalidArgument,
                std::string(what) + ": length mismatch " + std::to_string(a) + " vs " +
                    std::to_string(b));
  }
}

}  // namespace

std::string_view backend_name(Backend b) {
  switch (b) {
    case Backend::Scalar:
      return "scalar";
    case Backend::Avx2:
      return "avx2";
  }
  return "unknown";
}

bool backend_supported(Backend b) { return table_for(b) != nullptr; }

std::vector<Backend> supported_backends() {
  std::vector<Backend> out{Backend::Scalar};
  if (backend_supported(Backend::Avx2)) out.push_back(Backend::Avx2);
  return out;
}

Backend active_backend() { return state().backend.load(); }

void set_backend(Backend b) {
  if (!backend_supported(b)) {
    throw Error(ErrorCode::InvalidArgument,
                std::string("kernel backend not available: ") + std::string(backend_name(b)));
  }
  state().backend.store(b);
}

double sum_exp_shifted(std::span<const double> x, double shift) {
  return active().sum_exp_shifted(x.data(), x.size(), shift);
}

void exp_affine(std::span<const double> a, std::span<const double> b, std::span<const double> eps,
                std::span<double> out) {
  require_same(a.size(), eps.size(), "exp_affine");
  require_same(b.size(), eps.size(), "exp_affine");
  require_same(out.size(), eps.size(), "exp_affine");
  active().exp_affine(a.data(), b.data(), eps.data(), out.data(), eps.size());
}

void neg_log(std::span<const double> p, double scale, std::span<double> out) {
  require_same(out.size(), p.size(), "neg_log");
  active().neg_log(p.data(), scale, out.data(), p.size());
}

MomentSums weighted_sums(std::span<const double> w, std::span<const double> eps,
                         std::span<const double> s) {
  require_same(eps.size(), w.size(), "weighted_sums");
  require_same(s.size(), w.size(), "weighted_sums");
  return active().weighted_sums(w.data(), eps.data(), s.data(), w.size());
}

CentralSums centered_sums(std::span<const double> w, std::span<const double> eps,
                          std::span<const double> s, double mean_eps, double mean_s) {
  require_same(eps.size(), w.size(), "centered_sums");
  require_same(s.size(), w.size(), "centered_sums");
  return active().centered_sums(w.data(), eps.data(), s.data(), w.size(), mean_eps, mean_s);
}

MassieuSums massieu(std::span<const double> w, std::span<const double> eps,
                    std::span<const double> s, double a, double b, std::span<double> m) {
  require_same(eps.size(), w.size(), "massieu");
  require_same(s.size(), w.size(), "massieu");
  require_same(m.size(), w.size(), "massieu");
  return active().massieu(w.data(), eps.data(), s.data(), a, b, m.data(), w.size());
}

void triple_product(std::span<const double> x, std::span<const double> y,
                    std::span<const double> z, std::span<double> out) {
  require_same(y.size(), x.size(), "triple_product");
  require_same(z.size(), x.size(), "triple_product");
  require_same(out.size(), x.size(), "triple_product");
  active().triple_product(x.data(), y.data(), z.data(), out.data(), x.size());
}

double dot(std::span<const double> x, std::span<const double> y) {
  require_same(y.size(), x.size(), "dot");
  return active().dot(x.data(), y.data(), x.size());
}

}  // namespace hesim::kernels

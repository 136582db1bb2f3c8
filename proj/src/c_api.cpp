#include "assembler/assembler_c.h"

#include <cstdlib>
#include <cstring>
#include <memory>
#include <new>
#include <string>

#include "assembler/error.hpp"
#include "assembler/io.hpp"
#include "assembler/scenarios.hpp"

struct asm_context {
  assembler::Setup setup;
};

struct asm_report {
  assembler::ScenarioReport report;
};

namespace {

thread_local std::string g_last_error;

asm_status fail(asm_status status, const std::string& message) {
  g_last_error = message;
  return status;
}

asm_status status_of(assembler::ErrorCode code) {
  switch (code) {
    case assembler::ErrorCode::kInvalidArgument: return ASM_ERR_INVALID_ARGUMENT;
    case assembler::ErrorCode::kDegenerateConfiguration: return ASM_ERR_DEGENERATE;
    case assembler::ErrorCode::kSingularConfiguration: return ASM_ERR_SINGULAR;
    case assembler::ErrorCode::kConvergenceFailure: return ASM_ERR_CONVERGENCE;
    case assembler::ErrorCode::kParse: return ASM_ERR_PARSE;
    case assembler::ErrorCode::kIo: return ASM_ERR_IO;
  }
  return ASM_ERR_INTERNAL;
}

template <typename F>
asm_status guarded(F&& body) {
  try {
    g_last_error.clear();
    return body();
  } catch (const assembler::Error& e) {
    return fail(status_of(e.code()), e.what());
  } catch (const std::bad_alloc&) {
    return fail(ASM_ERR_INTERNAL, "out of memory");
  } catch (const std::exception& e) {
    return fail(ASM_ERR_INTERNAL, e.what());
  }
}

char* duplicate(const std::string& s) {
  char* out = static_cast<char*>(std::malloc(s.size() + 1));
  if (!out) throw std::bad_alloc();
  std::memcpy(out, s.c_str(), s.size() + 1);
  return out;
}

const assembler::ForceMatrix& pick(const assembler::ScenarioReport& r, int which) {
  if (which == ASM_POSE_INITIAL) return r.init_forces;
  if (which == ASM_POSE_FINAL) return r.final_forces;
  throw assembler::InvalidArgument("which must be ASM_POSE_INITIAL or ASM_POSE_FINAL");
}

}  // namespace

extern "C" {

const char* asm_last_error(void) { return g_last_error.c_str(); }

const char* asm_version(void) { return "1.0.0"; }

void asm_string_free(char* s) { std::free(s); }

asm_status asm_context_create(const char* config_path, asm_context** out) {
  return guarded([&] {
    if (!out) return fail(ASM_ERR_INVALID_ARGUMENT, "out is NULL");
    *out = nullptr;
    auto ctx = std::make_unique<asm_context>();
    ctx->setup = config_path ? assembler::load_setup(config_path) : assembler::default_setup();
    *out = ctx.release();
    return ASM_OK;
  });
}

asm_status asm_context_create_from_json(const char* json_text, asm_context** out) {
  return guarded([&] {
    if (!out || !json_text) return fail(ASM_ERR_INVALID_ARGUMENT, "json_text and out must be non-NULL");
    *out = nullptr;
    auto ctx = std::make_unique<asm_context>();
    ctx->setup = assembler::setup_from_json(json_text);
    *out = ctx.release();
    return ASM_OK;
  });
}

void asm_context_destroy(asm_context* ctx) { delete ctx; }

asm_status asm_context_config_json(const asm_context* ctx, char** out) {
  return guarded([&] {
    if (!ctx || !out) return fail(ASM_ERR_INVALID_ARGUMENT, "ctx and out must be non-NULL");
    *out = duplicate(assembler::setup_to_json(ctx->setup));
    return ASM_OK;
  });
}

asm_status asm_platform_count(const asm_context* ctx, size_t* out) {
  return guarded([&] {
    if (!ctx || !out) return fail(ASM_ERR_INVALID_ARGUMENT, "ctx and out must be non-NULL");
    *out = ctx->setup.stack.size();
    return ASM_OK;
  });
}

asm_status asm_scenario_count(const asm_context* ctx, size_t* out) {
  return guarded([&] {
    if (!ctx || !out) return fail(ASM_ERR_INVALID_ARGUMENT, "ctx and out must be non-NULL");
    *out = ctx->setup.scenarios.size();
    return ASM_OK;
  });
}

asm_status asm_scenario_name(const asm_context* ctx, size_t index, char** out) {
  return guarded([&] {
    if (!ctx || !out) return fail(ASM_ERR_INVALID_ARGUMENT, "ctx and out must be non-NULL");
    if (index >= ctx->setup.scenarios.size()) {
      return fail(ASM_ERR_INVALID_ARGUMENT, "scenario index " + std::to_string(index) + " out of range (" +
                                                std::to_string(ctx->setup.scenarios.size()) + " scenarios)");
    }
    *out = duplicate(ctx->setup.scenarios[index].name);
    return ASM_OK;
  });
}

asm_status asm_run_scenario(const asm_context* ctx, const char* name, asm_report** out) {
  return guarded([&] {
    if (!ctx || !name || !out) return fail(ASM_ERR_INVALID_ARGUMENT, "ctx, name and out must be non-NULL");
    *out = nullptr;
    const assembler::ScenarioSpec& spec = assembler::find_scenario(ctx->setup, name);
    auto report = std::make_unique<asm_report>();
    report->report = assembler::run_scenario(ctx->setup, spec);
    *out = report.release();
    return ASM_OK;
  });
}

void asm_report_destroy(asm_report* report) { delete report; }

asm_status asm_report_summary_get(const asm_report* report, asm_report_summary* out) {
  return guarded([&] {
    if (!report || !out) return fail(ASM_ERR_INVALID_ARGUMENT, "report and out must be non-NULL");
    const assembler::ScenarioReport& r = report->report;
    out->feasible = r.feasible ? 1 : 0;
    out->converged = r.converged ? 1 : 0;
    out->constraints_satisfied = r.final_constraints.satisfied(r.spec.config.constraint_tolerance) ? 1 : 0;
    out->iterations = r.iterations;
    out->objective_initial = r.objective_initial;
    out->objective_final = r.objective_final;
    out->max_abs_initial = r.max_abs_initial;
    out->max_abs_final = r.max_abs_final;
    out->mean_abs_initial = r.mean_abs_initial;
    out->mean_abs_final = r.mean_abs_final;
    out->worst_margin = r.final_constraints.worst();
    out->runtime_seconds = r.runtime;
    return ASM_OK;
  });
}

asm_status asm_report_json(const asm_report* report, char** out) {
  return guarded([&] {
    if (!report || !out) return fail(ASM_ERR_INVALID_ARGUMENT, "report and out must be non-NULL");
    *out = duplicate(assembler::report_to_json(report->report));
    return ASM_OK;
  });
}

asm_status asm_report_force_csv(const asm_report* report, char** out) {
  return guarded([&] {
    if (!report || !out) return fail(ASM_ERR_INVALID_ARGUMENT, "report and out must be non-NULL");
    *out = duplicate(assembler::render_force_table(report->report));
    return ASM_OK;
  });
}

asm_status asm_report_pose_json(const asm_report* report, int which, char** out) {
  return guarded([&] {
    if (!report || !out) return fail(ASM_ERR_INVALID_ARGUMENT, "report and out must be non-NULL");
    const assembler::ScenarioReport& r = report->report;
    if (which != ASM_POSE_INITIAL && which != ASM_POSE_FINAL) {
      return fail(ASM_ERR_INVALID_ARGUMENT, "which must be ASM_POSE_INITIAL or ASM_POSE_FINAL");
    }
    *out = duplicate(assembler::pose_to_json(which == ASM_POSE_INITIAL ? r.initial_pose : r.final_pose));
    return ASM_OK;
  });
}

asm_status asm_report_forces(const asm_report* report, int which, double* out, size_t capacity, size_t* count) {
  return guarded([&] {
    if (!report || !count) return fail(ASM_ERR_INVALID_ARGUMENT, "report and count must be non-NULL");
    const assembler::ForceMatrix& f = pick(report->report, which);
    *count = static_cast<size_t>(f.size());
    if (!out) return ASM_OK;
    if (capacity < *count) return fail(ASM_ERR_INVALID_ARGUMENT, "output buffer too small");
    for (Eigen::Index i = 0; i < f.rows(); ++i) {
      for (Eigen::Index k = 0; k < f.cols(); ++k) out[i * f.cols() + k] = f(i, k);
    }
    return ASM_OK;
  });
}

asm_status asm_solve_ik(const asm_context* ctx, const double goal[6], int* feasible, char** pose_json) {
  return guarded([&] {
    if (!ctx || !goal || !feasible || !pose_json) {
      return fail(ASM_ERR_INVALID_ARGUMENT, "ctx, goal, feasible and pose_json must be non-NULL");
    }
    const assembler::Setup& s = ctx->setup;
    const assembler::Transform target =
        assembler::transform_from_taa({{goal[0], goal[1], goal[2]}, {goal[3], goal[4], goal[5]}});
    const assembler::PoseAcceptor accept = [&](const assembler::StackPose& pose) {
      return assembler::constraints(s.stack, s.masses, s.optimizer, pose, target).satisfied(0.0);
    };
    const assembler::InitResult init = assembler::initial_condition(s.stack, target, s.initializer, accept);
    *feasible = init.feasible ? 1 : 0;
    *pose_json = duplicate(assembler::pose_to_json(init.pose));
    return ASM_OK;
  });
}

asm_status asm_forces_from_pose(const asm_context* ctx, const char* pose_json, char** csv) {
  return guarded([&] {
    if (!ctx || !pose_json || !csv) return fail(ASM_ERR_INVALID_ARGUMENT, "ctx, pose_json and csv must be non-NULL");
    const assembler::StackPose pose = assembler::pose_from_json(pose_json);
    const assembler::ForceMatrix f = assembler::stack_leg_forces(ctx->setup.stack, pose, ctx->setup.masses);
    *csv = duplicate(assembler::render_force_block("forces", f));
    return ASM_OK;
  });
}

}  // extern "C"

/* Compiled as C to keep the public header C-clean. */
#include "assembler/assembler_c.h"

int c_header_scenario_count(void) {
  asm_context* ctx = NULL;
  size_t count = 0;
  if (asm_context_create(NULL, &ctx) != ASM_OK) return -1;
  if (asm_scenario_count(ctx, &count) != ASM_OK) count = 0;
  asm_context_destroy(ctx);
  return (int)count;
}

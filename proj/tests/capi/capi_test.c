/*
 * Copyright (C) 2026 The upvs authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 * http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

/* Exercises the C interface from C, so the header stays C-clean. */

#include <stdio.h>
#include <string.h>

#include "upvs/upvs.h"

static int failures = 0;

#define EXPECT(cond)                                                   \
    do {                                                               \
        if (!(cond)) {                                                 \
            fprintf(stderr, "%s:%d: failed: %s\n", __FILE__, __LINE__, #cond); \
            ++failures;                                                \
        }                                                              \
    } while (0)

int main(void) {
    upvs_workspace* ws = NULL;
    char* out = NULL;

    EXPECT(strlen(upvs_version()) > 0);
    EXPECT(strcmp(upvs_last_error(), "") == 0);

    EXPECT(upvs_workspace_open_file("/no/such/file.pvs", &ws) == UPVS_ERR_IO);
    EXPECT(ws == NULL);
    EXPECT(strstr(upvs_last_error(), "/no/such/file.pvs") != NULL);
    EXPECT(upvs_workspace_open_file(NULL, &ws) == UPVS_ERR_INVALID_ARGUMENT);

    EXPECT(upvs_workspace_open_file(UPVS_FIXTURES_DIR "/programs/arith.pvs", &ws) == UPVS_OK);
    EXPECT(strstr(upvs_workspace_uri(ws), "arith.pvs") != NULL);

    EXPECT(upvs_workspace_eval(ws, NULL, "1+2*3", 0, &out) == UPVS_OK);
    EXPECT(out && strcmp(out, "7") == 0);
    upvs_free_string(out);
    out = NULL;

    EXPECT(upvs_workspace_eval(ws, "arith", "loop(0)", 1000, &out) == UPVS_ERR_FUEL_EXHAUSTED);
    EXPECT(out == NULL);
    EXPECT(upvs_workspace_eval(ws, NULL, "q(0)", 0, &out) == UPVS_ERR_DIVISION_BY_ZERO);
    EXPECT(upvs_workspace_eval(ws, "nosuch", "1", 0, &out) == UPVS_ERR_FORMULA_NOT_FOUND);
    EXPECT(upvs_workspace_eval(ws, NULL, "fact(TRUE)", 0, &out) == UPVS_ERR_EVAL_INVALID);
    EXPECT(strstr(upvs_last_error_data(), "expected nat, found bool") != NULL);

    EXPECT(upvs_workspace_check(ws, &out) == UPVS_OK);
    EXPECT(out && strstr(out, "\"errors\": 0") != NULL);
    EXPECT(out && strstr(out, "q_TCC1") != NULL);
    upvs_free_string(out);

    EXPECT(upvs_workspace_index(ws, &out) == UPVS_OK);
    EXPECT(out && strstr(out, "\"declarations\"") != NULL);
    upvs_free_string(out);
    upvs_workspace_destroy(ws);

    EXPECT(upvs_workspace_open_dir(UPVS_FIXTURES_DIR "/workspace", &ws) == UPVS_OK);
    EXPECT(upvs_workspace_check(ws, &out) == UPVS_ERR_INVALID_ARGUMENT); /* no file */
    upvs_workspace_destroy(ws);

    {
        upvs_server* server = NULL;
        upvs_server_options opts;
        memset(&opts, 0, sizeof opts);
        opts.debounce_ms = 10;
        EXPECT(upvs_server_create(&opts, &server) == UPVS_OK);
        upvs_server_request_stop(server);
        int code = -1;
        EXPECT(upvs_server_serve_tcp(server, 0, NULL, NULL, &code) == UPVS_OK);
        EXPECT(code == 0);
        EXPECT(upvs_server_serve_tcp(server, 70000, NULL, NULL, &code) == UPVS_ERR_INVALID_ARGUMENT);
        upvs_server_destroy(server);
    }

    if (failures == 0) printf("capi: all checks passed\n");
    return failures == 0 ? 0 : 1;
}

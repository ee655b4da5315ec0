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

#ifndef UPVS_UPVS_H
#define UPVS_UPVS_H

/*
 * C interface to the upvs core. All strings are UTF-8. Strings returned
 * through out-parameters are owned by the caller and released with
 * upvs_free_string(). Functions return UPVS_OK or one of the error codes
 * listed in docs/protocol.md; upvs_last_error() then describes the failure.
 */

#include <stdint.h>

#ifdef __cplusplus
extern "C" {
#endif

#if defined(__GNUC__)
#define UPVS_API __attribute__((visibility("default")))
#else
#define UPVS_API
#endif

typedef int upvs_status;

enum {
    UPVS_OK = 0,
    UPVS_ERR_STALE_VERSION = 1001,
    UPVS_ERR_NOT_TYPECHECKED = 1003,
    UPVS_ERR_FORMULA_NOT_FOUND = 1011,
    UPVS_ERR_EVAL_INVALID = 1012,
    UPVS_ERR_DIVISION_BY_ZERO = 1013,
    UPVS_ERR_FUEL_EXHAUSTED = 1014,
    UPVS_ERR_NON_EXECUTABLE = 1015,
    UPVS_ERR_IO = 1020,
    UPVS_ERR_CANCELLED = 1027,
    UPVS_ERR_PORT_IN_USE = 1028,
    UPVS_ERR_INVALID_ARGUMENT = 1029,
    UPVS_ERR_INTERNAL = 1099
};

typedef struct upvs_workspace upvs_workspace;
typedef struct upvs_server upvs_server;

UPVS_API const char* upvs_version(void);
/* Message of the last failed call on this thread; "" if none. */
UPVS_API const char* upvs_last_error(void);
/* JSON "data" of the last failure on this thread ("null" if none). */
UPVS_API const char* upvs_last_error_data(void);
UPVS_API void upvs_free_string(char* s);

/* A workspace made of the directory holding `file`. */
UPVS_API upvs_status upvs_workspace_open_file(const char* file, upvs_workspace** out);
/* A workspace of every .pvs file below `root`. */
UPVS_API upvs_status upvs_workspace_open_dir(const char* root, upvs_workspace** out);
UPVS_API void upvs_workspace_destroy(upvs_workspace* ws);
/* Uri of the file passed to upvs_workspace_open_file ("" for directories). */
UPVS_API const char* upvs_workspace_uri(const upvs_workspace* ws);

/* {uri, diagnostics, tccs, errors} as JSON. */
UPVS_API upvs_status upvs_workspace_check(upvs_workspace* ws, char** json_out);
/* Replays proof scripts from `scripts_dir` (NULL: the file's directory).
 * {uri, results, proved, total, typechecked} as JSON. */
UPVS_API upvs_status upvs_workspace_prove(upvs_workspace* ws, const char* scripts_dir, char** json_out);
/* `theory` may be NULL for the file's first theory; `fuel` 0 means the default. */
UPVS_API upvs_status upvs_workspace_eval(upvs_workspace* ws, const char* theory, const char* expr, uint64_t fuel,
                                         char** value_out);
/* {declarations, theories} as JSON. */
UPVS_API upvs_status upvs_workspace_index(upvs_workspace* ws, char** json_out);

typedef struct upvs_server_options {
    int debounce_ms;        /* <= 0: default 250 */
    int pool_size;          /* <= 0: default */
    uint64_t eval_fuel;     /* 0: default */
    const char* scripts_dir; /* may be NULL */
    const char* root;        /* may be NULL */
} upvs_server_options;

UPVS_API upvs_status upvs_server_create(const upvs_server_options* options, upvs_server** out);
/* Serves one LSP connection; *exit_code gets the process exit code. */
UPVS_API upvs_status upvs_server_serve_fds(upvs_server* server, int in_fd, int out_fd, int* exit_code);
/* Listens on 127.0.0.1:port (0: any free port, reported to `listening`). */
UPVS_API upvs_status upvs_server_serve_tcp(upvs_server* server, int port, void (*listening)(int port, void* user),
                                           void* user, int* exit_code);
/* Makes a running serve call return with exit code 0. Async-signal-safe. */
UPVS_API void upvs_server_request_stop(upvs_server* server);
UPVS_API void upvs_server_destroy(upvs_server* server);

#ifdef __cplusplus
}
#endif

#endif /* UPVS_UPVS_H */

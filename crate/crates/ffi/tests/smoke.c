#include <stdio.h>
#include <string.h>
#include "organon.h"

static const char *SCRIPT =
    "relation mother/2 = (ann, bob), (ann, cal)\n"
    "def sibling y z := mother (exists x . mother x y) z\n"
    "query relation sibling\n";

int main(void) {
    OrganonSession *s = NULL;
    if (organon_session_new(SCRIPT, NULL, &s) != ORGANON_STATUS_OK) {
        fprintf(stderr, "new: %s\n", organon_last_error());
        return 1;
    }
    char *json = NULL;
    OrganonStatus st = organon_session_run_json(s, true, &json);
    if (st != ORGANON_STATUS_OK || strstr(json, "\"agree\"") == NULL) {
        fprintf(stderr, "run: %d %s\n", st, organon_last_error());
        return 1;
    }
    organon_string_free(json);
    organon_session_free(s);

    char *term = NULL;
    if (organon_abstract("x", "x", NULL, &term) != ORGANON_STATUS_OK || strcmp(term, "S K K") != 0) {
        return 1;
    }
    organon_string_free(term);

    if (organon_session_new("def f x := g x", NULL, &s) != ORGANON_STATUS_PARSE_ERROR) {
        return 1;
    }
    printf("ok %s\n", organon_version());
    return 0;
}

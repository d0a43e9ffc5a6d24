"""
Programmatic entry point: main(['experiment', 'A', '--N', '64']) runs the
management command and returns its exit status instead of exiting.
"""

import os
import sys


def main(argv=None) -> int:
    os.environ.setdefault('DJANGO_SETTINGS_MODULE', 'convexwitness.settings')
    from django.core.management import ManagementUtility

    argv = sys.argv[1:] if argv is None else list(argv)
    try:
        ManagementUtility(['witness', *argv]).execute()
    except SystemExit as exc:
        if exc.code is None:
            return 0
        return exc.code if isinstance(exc.code, int) else 1
    return 0


if __name__ == '__main__':
    sys.exit(main())

import os

from flask.cli import FlaskGroup

from svd_pinns import create_app


def _create_app():
    return create_app(os.environ.get("SVD_PINNS_CONFIG", "DevelopmentConfig"))


main = FlaskGroup(
    name="svd-pinns",
    create_app=_create_app,
    add_default_commands=False,
    help="Train PINNs, transfer them across right-hand sides and sweep optimizers.",
)


if __name__ == "__main__":
    main()

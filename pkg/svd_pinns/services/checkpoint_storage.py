"""
Storage for run artifacts: checkpoints, the shared basis archive and CSV logs.

Artifacts are addressed by (run directory, file name). The backend is chosen
by STORAGE_TYPE: the local filesystem, or an S3-compatible bucket where the
run directory becomes a key prefix.
"""

import os
import posixpath
from abc import ABC, abstractmethod
from typing import List, Optional

from flask import current_app

from svd_pinns.exceptions import CheckpointError
from svd_pinns.models import Checkpoint, NetworkParams
from svd_pinns.services import checkpoint_codec

try:
    import boto3
    from botocore.exceptions import ClientError

    HAS_BOTO3 = True
except ImportError:
    HAS_BOTO3 = False

BASIS_FILE = "basis.svd"


class StorageBackend(ABC):
    """Abstract base class for storage backends."""

    @abstractmethod
    def save_bytes(self, key: str, data: bytes) -> bool:
        """Write ``data`` under ``key``, replacing any previous content."""
        pass

    @abstractmethod
    def load_bytes(self, key: str) -> Optional[bytes]:
        """Content stored under ``key``, or None."""
        pass

    @abstractmethod
    def exists(self, key: str) -> bool:
        pass

    @abstractmethod
    def list(self, prefix: str) -> List[str]:
        """Keys below ``prefix``."""
        pass

    @abstractmethod
    def size(self, key: str) -> Optional[int]:
        """Size in bytes, or None when the key is missing."""
        pass

    @abstractmethod
    def delete(self, key: str) -> bool:
        pass


class LocalStorageBackend(StorageBackend):
    """Local filesystem storage backend."""

    def __init__(self, base_path: str = "."):
        self.base_path = base_path

    def _get_full_path(self, key: str) -> str:
        """Convert a storage key to a full local path."""
        return os.path.abspath(os.path.join(self.base_path, key))

    def save_bytes(self, key: str, data: bytes) -> bool:
        try:
            full_path = self._get_full_path(key)
            os.makedirs(os.path.dirname(full_path), exist_ok=True)
            # write then rename so readers never see a partial file
            partial = f"{full_path}.partial"
            with open(partial, "wb") as f:
                f.write(data)
            os.replace(partial, full_path)
            return True
        except Exception as e:
            current_app.logger.error(f"Error saving {key}: {str(e)}")
            return False

    def load_bytes(self, key: str) -> Optional[bytes]:
        try:
            full_path = self._get_full_path(key)
            if not os.path.isfile(full_path):
                return None
            with open(full_path, "rb") as f:
                return f.read()
        except Exception as e:
            current_app.logger.error(f"Error reading {key}: {str(e)}")
            return None

    def exists(self, key: str) -> bool:
        return os.path.isfile(self._get_full_path(key))

    def list(self, prefix: str) -> List[str]:
        try:
            full_prefix_path = self._get_full_path(prefix)
            if os.path.isfile(full_prefix_path):
                return [prefix]
            keys = []
            for root, _, filenames in os.walk(full_prefix_path):
                for filename in filenames:
                    relative_path = os.path.relpath(os.path.join(root, filename), full_prefix_path)
                    keys.append(posixpath.join(prefix, relative_path.replace(os.sep, "/")))
            return sorted(keys)
        except Exception as e:
            current_app.logger.error(f"Error listing {prefix}: {str(e)}")
            return []

    def size(self, key: str) -> Optional[int]:
        full_path = self._get_full_path(key)
        if not os.path.isfile(full_path):
            return None
        return os.stat(full_path).st_size

    def delete(self, key: str) -> bool:
        try:
            full_path = self._get_full_path(key)
            if os.path.isfile(full_path):
                os.remove(full_path)
                return True
            return False
        except Exception as e:
            current_app.logger.error(f"Error deleting {key}: {str(e)}")
            return False


class S3StorageBackend(StorageBackend):
    """S3-compatible storage backend using boto3."""

    def __init__(
        self,
        bucket_name: str,
        endpoint_url: str,
        access_key: str,
        secret_key: str,
        region_name: str = "us-east-1",
        use_ssl: bool = True,
    ):
        if not HAS_BOTO3:
            raise ImportError("boto3 is required for S3 storage backend")

        self.bucket_name = bucket_name
        self.s3_client = boto3.client(
            "s3",
            endpoint_url=endpoint_url or None,
            aws_access_key_id=access_key,
            aws_secret_access_key=secret_key,
            region_name=region_name,
            use_ssl=use_ssl,
        )
        self._ensure_bucket_exists()

    def _ensure_bucket_exists(self) -> None:
        """Ensure the S3 bucket exists, create it if not."""
        try:
            self.s3_client.head_bucket(Bucket=self.bucket_name)
        except ClientError as e:
            error_code = e.response["Error"]["Code"]
            # MinIO can answer 403 for a missing bucket depending on configuration
            if error_code not in ["404", "NoSuchBucket", "403", "Forbidden"]:
                current_app.logger.error(
                    f"Unexpected error accessing bucket {self.bucket_name}: {str(e)}"
                )
                raise
            try:
                current_app.logger.info(f"Creating bucket: {self.bucket_name}")
                self.s3_client.create_bucket(Bucket=self.bucket_name)
            except ClientError as create_error:
                code = create_error.response["Error"]["Code"]
                if code not in ("BucketAlreadyExists", "BucketAlreadyOwnedByYou"):
                    current_app.logger.error(
                        f"Error creating bucket {self.bucket_name}: {str(create_error)}"
                    )
                    raise

    @staticmethod
    def _key(key: str) -> str:
        return posixpath.normpath(key.replace(os.sep, "/")).lstrip("/")

    def save_bytes(self, key: str, data: bytes) -> bool:
        try:
            self.s3_client.put_object(Bucket=self.bucket_name, Key=self._key(key), Body=data)
            return True
        except Exception as e:
            current_app.logger.error(f"Error saving {key} to S3: {str(e)}")
            return False

    def load_bytes(self, key: str) -> Optional[bytes]:
        try:
            response = self.s3_client.get_object(Bucket=self.bucket_name, Key=self._key(key))
            return response["Body"].read()
        except ClientError as e:
            if e.response["Error"]["Code"] != "NoSuchKey":
                current_app.logger.error(f"Error downloading {key} from S3: {str(e)}")
            return None
        except Exception as e:
            current_app.logger.error(f"Error downloading {key} from S3: {str(e)}")
            return None

    def exists(self, key: str) -> bool:
        return self.size(key) is not None

    def list(self, prefix: str) -> List[str]:
        try:
            paginator = self.s3_client.get_paginator("list_objects_v2")
            keys = []
            for page in paginator.paginate(Bucket=self.bucket_name, Prefix=self._key(prefix)):
                keys.extend(obj["Key"] for obj in page.get("Contents", []))
            return sorted(keys)
        except Exception as e:
            current_app.logger.error(f"Error listing {prefix} in S3: {str(e)}")
            return []

    def size(self, key: str) -> Optional[int]:
        try:
            response = self.s3_client.head_object(Bucket=self.bucket_name, Key=self._key(key))
            return int(response["ContentLength"])
        except ClientError:
            return None
        except Exception as e:
            current_app.logger.error(f"Error reading metadata of {key} from S3: {str(e)}")
            return None

    def delete(self, key: str) -> bool:
        try:
            self.s3_client.delete_object(Bucket=self.bucket_name, Key=self._key(key))
            return True
        except Exception as e:
            current_app.logger.error(f"Error deleting {key} from S3: {str(e)}")
            return False


class CheckpointStorageService:
    """Reads and writes run artifacts through the configured backend."""

    def __init__(self):
        self._backend = None

    @property
    def backend(self) -> StorageBackend:
        """Get the storage backend instance."""
        if self._backend is None:
            storage_type = current_app.config.get("STORAGE_TYPE", "local")

            if storage_type == "local":
                self._backend = LocalStorageBackend()
            elif storage_type == "s3":
                self._backend = S3StorageBackend(
                    bucket_name=current_app.config["S3_BUCKET_NAME"],
                    endpoint_url=current_app.config["S3_ENDPOINT_URL"],
                    access_key=current_app.config["S3_ACCESS_KEY_ID"],
                    secret_key=current_app.config["S3_SECRET_KEY"],
                    region_name=current_app.config["S3_REGION_NAME"],
                    use_ssl=current_app.config["S3_USE_SSL"],
                )
            else:
                raise ValueError(f"Unsupported storage type: {storage_type}")

        return self._backend

    @staticmethod
    def key(run_dir: str, name: str) -> str:
        return os.path.join(run_dir, name)

    def write_bytes(self, run_dir: str, name: str, data: bytes) -> str:
        """
        Store ``data`` as ``name`` in ``run_dir``.

        Returns:
            str: The storage key

        Raises:
            OSError: the backend could not write the key
        """
        key = self.key(run_dir, name)
        if not self.backend.save_bytes(key, data):
            raise OSError(f"Failed to write {key}")
        return key

    def read_bytes(self, run_dir: str, name: str) -> Optional[bytes]:
        return self.backend.load_bytes(self.key(run_dir, name))

    def exists(self, run_dir: str, name: str) -> bool:
        return self.backend.exists(self.key(run_dir, name))

    def size(self, run_dir: str, name: str) -> Optional[int]:
        return self.backend.size(self.key(run_dir, name))

    def list_run(self, run_dir: str) -> List[str]:
        return self.backend.list(run_dir)

    def delete(self, run_dir: str, name: str) -> bool:
        return self.backend.delete(self.key(run_dir, name))

    def save_checkpoint(self, run_dir: str, name: str, checkpoint: Checkpoint) -> str:
        key = self.write_bytes(run_dir, name, checkpoint_codec.encode(checkpoint))
        current_app.logger.info(f"Saved {checkpoint.kind} checkpoint {key}")
        return key

    def load_checkpoint(self, run_dir: str, name: str) -> Checkpoint:
        """
        Raises:
            CheckpointError: missing or unreadable, with the key in the message
        """
        key = self.key(run_dir, name)
        payload = self.backend.load_bytes(key)
        if payload is None:
            raise CheckpointError(f"Checkpoint not found: {key}")
        try:
            return checkpoint_codec.decode(payload)
        except CheckpointError as e:
            raise CheckpointError(f"{key}: {e}")

    def save_basis(self, run_dir: str, params: NetworkParams, config_hash: str) -> str:
        """
        Write ``basis.svd`` for factored ``params`` unless the same archive is
        already there, and return its id.

        Raises:
            CheckpointError: a basis built from different parameters exists
        """
        payload = checkpoint_codec.encode(checkpoint_codec.make_basis(params, config_hash))
        basis_id = checkpoint_codec.content_id(payload)
        existing = self.read_bytes(run_dir, BASIS_FILE)
        if existing is not None:
            existing_id = checkpoint_codec.content_id(existing)
            if existing_id != basis_id:
                raise CheckpointError(
                    f"{self.key(run_dir, BASIS_FILE)} holds basis {existing_id}, "
                    f"but theta0 splits into basis {basis_id}"
                )
            current_app.logger.debug(f"Reusing basis {basis_id} in {run_dir}")
            return basis_id
        self.write_bytes(run_dir, BASIS_FILE, payload)
        current_app.logger.info(f"Wrote basis archive {basis_id} to {self.key(run_dir, BASIS_FILE)}")
        return basis_id

    def load_basis(self, run_dir: str, basis_id: Optional[str] = None) -> Checkpoint:
        key = self.key(run_dir, BASIS_FILE)
        payload = self.backend.load_bytes(key)
        if payload is None:
            raise CheckpointError(f"Basis archive not found: {key}")
        found = checkpoint_codec.content_id(payload)
        if basis_id is not None and found != basis_id:
            raise CheckpointError(f"{key} is basis {found}, checkpoint references {basis_id}")
        return checkpoint_codec.decode(payload)

    def load_params(self, run_dir: str, name: str, expected_hash: Optional[str] = None) -> NetworkParams:
        """Load a checkpoint and rebuild its parameters, fetching the basis when needed."""
        checkpoint = self.load_checkpoint(run_dir, name)
        basis = None
        if checkpoint.basis_id:
            basis_dir = checkpoint.extra.get("basis_dir", run_dir)
            basis = self.load_basis(basis_dir, checkpoint.basis_id)
        return checkpoint_codec.checkpoint_to_params(checkpoint, expected_hash, basis)
